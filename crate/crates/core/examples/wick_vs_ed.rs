//! The correlation-function route to the full two-site matrix of free
//! electrons against exact diagonalization of the whole Fock space.

use epart::fock::Operator;
use epart::freefermion::{correlations, full_two_site_matrix};
use epart::linalg::max_abs_diff;
use epart::models::spinful_fermion_lattice;
use epart::thermal::{ThermalSolver, ThermalSpec};

fn main() -> epart::Result<()> {
    for m in [4, 5, 6] {
        let h = spinful_fermion_lattice(m, 1.0, true)?;
        let solver = ThermalSolver::with_number(&h, &Operator::total_number(h.basis(), None)?)?;
        let mut worst: f64 = 0.0;
        for (temperature, mu) in [(0.0, -0.5), (0.3, 0.0), (1.0, 0.7), (5.0, -1.5)] {
            let spec = ThermalSpec::grand_canonical(temperature, mu);
            for d in 1..m {
                let ed = solver.two_site_matrix(&spec, 0, d)?;
                let wick = full_two_site_matrix(&correlations(m, 1.0, temperature, mu, d)?)?;
                worst = worst.max(max_abs_diff(&ed.matrix, &wick.matrix));
            }
        }
        println!(
            "M={m}: Fock dimension {}, largest entry difference {worst:.2e}",
            h.dim()
        );
    }
    Ok(())
}
