//! Runs a `compute` configuration through the library and prints the CSV,
//! the same path `epart compute --config FILE` takes.

use epart::cli::{compute, RunConfig};

const CONFIG: &str = "\
# two spinless fermions on a four-site ring, cooled
model.family = spinless-fermion-ring
model.sites = 4
model.particles = 2
ensemble.kind = canonical
partition.a = 0, 1
partition.b = 2, 3
sweep.axis = temperature
sweep.start = 0
sweep.stop = 2
sweep.points = 5
";

fn main() {
    let path = std::env::args().nth(1);
    let text = match &path {
        Some(p) => std::fs::read_to_string(p).expect("readable config"),
        None => CONFIG.to_string(),
    };
    let table = RunConfig::parse(&text).and_then(|run| compute(&run));
    match table {
        Ok(t) => print!("{}", t.to_csv(None)),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
