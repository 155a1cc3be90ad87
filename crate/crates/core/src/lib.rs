pub mod cli;
pub mod error;
pub mod fock;
pub mod freefermion;
pub mod linalg;
pub mod measures;
pub mod models;
pub mod thermal;

pub use error::{Error, Result};
