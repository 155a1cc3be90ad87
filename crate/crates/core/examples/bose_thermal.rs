//! Canonical thermal state of the four-site Bose-Hubbard ring: entanglement
//! of particles switches on once k_B T drops below the 2 sqrt(2) t gap.

use epart::measures::entanglement_of_particles;
use epart::models::{bose_hubbard_ring, partitions};
use epart::thermal::ThermalSolver;

fn main() -> epart::Result<()> {
    let (t, u) = (0.02, 1.0);
    let solver = ThermalSolver::new(&bose_hubbard_ring(4, t, u, 2)?)?;
    let gap = 2.0 * 2f64.sqrt() * t;
    println!("t/U = {t}, gap scale 2 sqrt(2) t = {gap:.4}");
    println!("{:>12} {:>12} {:>8} {:>10}", "kT/gap", "E_P", "P11", "E_F post");
    for ratio in [10.0, 3.0, 1.0, 0.5, 0.35, 0.1, 0.01] {
        let rho = solver.canonical(ratio * gap)?;
        let r = entanglement_of_particles(&rho, &partitions::ring_adjacent())?;
        println!(
            "{ratio:>12} {:>12.3e} {:>8.4} {:>10.6}",
            r.total,
            r.p11(),
            r.posterior_11()
        );
    }
    Ok(())
}
