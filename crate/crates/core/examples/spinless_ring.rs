//! Two spinless fermions on a four-site ring. The ground level is doubly
//! degenerate; each momentum eigenstate and their equal mixture carry the
//! same entanglement of particles, but the mixture has lower negativity.

use epart::fock::DensityMatrix;
use epart::measures::{binary_entropy, entanglement_of_particles, negativity};
use epart::models::{partitions, spinless_fermion_ring, spinless_momentum_state};
use epart::thermal::ground_state;

fn main() -> epart::Result<()> {
    let g = ground_state(&spinless_fermion_ring(4, 1.0, 2)?)?;
    println!("ground energy {:.6}, degeneracy {}", g.energy, g.degeneracy());

    let a = DensityMatrix::from_pure(&spinless_momentum_state(4, &[0, 1])?);
    let b = DensityMatrix::from_pure(&spinless_momentum_state(4, &[0, 3])?);
    let expected = binary_entropy(0.5 + 2f64.sqrt() / 3.0)?;
    for (name, rho) in [("k = {0, 1}", &a), ("k = {0, 3}", &b), ("mixture", &g.mixture)] {
        let adj = entanglement_of_particles(rho, &partitions::ring_adjacent())?;
        let diag = entanglement_of_particles(rho, &partitions::ring_diagonal())?;
        let view = rho.bipartite(&partitions::ring_adjacent(), Some((1, 1)))?;
        let neg = negativity(&view.normalized_matrix(), view.dim_a(), view.dim_b());
        println!(
            "{name:>11}: P11 {:.6}  E_F {:.6}  E_P diag {:.1e}  negativity {:.6}",
            adj.p11(),
            adj.posterior_11(),
            diag.total,
            neg
        );
    }
    println!("h(1/2 + sqrt(2)/3) = {expected:.6}");
    Ok(())
}
