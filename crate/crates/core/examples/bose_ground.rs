//! Two bosons on a four-site Bose-Hubbard ring: ground-state entanglement of
//! particles against U/t, for adjacent and diagonal partitions.

use epart::measures::{binary_entropy, entanglement_of_particles};
use epart::models::{bose_hubbard_ring, partitions};
use epart::thermal::ground_state;

fn main() -> epart::Result<()> {
    let saturation = 0.75 * binary_entropy(0.5 + 2f64.sqrt() / 3.0)?;
    println!(
        "{:>10} {:>12} {:>12} {:>8} {:>10}",
        "U/t", "E_P adj", "E_P diag", "P11", "E_F"
    );
    for u in [0.0, 0.1, 1.0, 10.0, 100.0, 1000.0] {
        let g = ground_state(&bose_hubbard_ring(4, 1.0, u, 2)?)?;
        let adj = entanglement_of_particles(&g.mixture, &partitions::ring_adjacent())?;
        let diag = entanglement_of_particles(&g.mixture, &partitions::ring_diagonal())?;
        println!(
            "{u:>10} {:>12.6} {:>12.2e} {:>8.4} {:>10.6}",
            adj.total,
            diag.total,
            adj.p11(),
            adj.posterior_11()
        );
    }
    println!("hardcore saturation (3/4) h(1/2 + sqrt(2)/3) = {saturation:.6}");

    let g = ground_state(&bose_hubbard_ring(4, 1e-4, 1.0, 2)?)?;
    println!(
        "E_g / t at t/U = 1e-4: {:.6} (-2 sqrt 2 = {:.6})",
        g.energy / 1e-4,
        -2.0 * 2f64.sqrt()
    );
    Ok(())
}
