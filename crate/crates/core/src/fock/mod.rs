//! Occupation-number bases, second-quantized operators, states and
//! density matrices for bosons and fermions.

pub mod basis;
pub mod density;
pub mod operator;
pub mod state;

pub use basis::{binomial, enumerate_basis, FockBasis, OccupationState, ParticleKind, Sector};
pub use density::{
    local_sectors, partial_trace_b, partial_transpose_b, project_local_number, reduce_two_site, spin_orbital,
    BipartiteState, Bipartition, DensityBlock, DensityMatrix, LocalState, Spin, TwoSiteMatrix, ONE_PER_SITE,
};
pub use operator::{build_operator, transform_terms, Ladder, Operator, Term};
pub use state::StateVector;
