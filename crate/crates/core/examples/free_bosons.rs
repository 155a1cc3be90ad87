//! Non-interacting bosons share all their particles in one mode: the state
//! is entangled between modes but has no entanglement of particles.

use epart::fock::{Bipartition, DensityMatrix};
use epart::measures::{entanglement_of_modes, entanglement_of_particles, Measure};
use epart::models::free_boson_ground;

fn main() -> epart::Result<()> {
    for (m, n) in [(2, 1), (4, 2), (5, 3), (6, 4)] {
        let rho = DensityMatrix::from_pure(&free_boson_ground(m, n)?);
        let mut max_ep: f64 = 0.0;
        let mut min_em = f64::INFINITY;
        let partitions = Bipartition::all_complete(m);
        for p in &partitions {
            max_ep = max_ep.max(entanglement_of_particles(&rho, p)?.total.abs());
            min_em = min_em.min(entanglement_of_modes(&rho, p, Measure::Entropy)?);
        }
        println!(
            "M={m} N={n}: {} partitions, max |E_P| = {max_ep:.1e}, min E_M = {min_em:.4}",
            partitions.len()
        );
    }
    Ok(())
}
