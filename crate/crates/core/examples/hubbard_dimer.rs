//! Hubbard dimer ground state: exact diagonalization against the closed
//! form, and the entanglement of particles for site, spin and momentum
//! partitions.

use epart::fock::DensityMatrix;
use epart::measures::{entanglement_of_modes, entanglement_of_particles, Measure};
use epart::models::{dimer_ground_analytic, dimer_ground_momentum, dimer_p11, hubbard_dimer, partitions};
use epart::thermal::{ground_state, ThermalSolver};

fn main() -> epart::Result<()> {
    println!(
        "{:>6} {:>12} {:>8} {:>8} {:>8} {:>10} {:>10}",
        "U/t", "1-overlap", "P11", "closed", "E_F", "E_P mom", "E_P spin"
    );
    for u in [0.0, 1.0, 3.0, 10.0, 100.0] {
        let g = ground_state(&hubbard_dimer(1.0, u)?)?;
        let exact = dimer_ground_analytic(1.0, u)?;
        let sites = entanglement_of_particles(&g.mixture, &partitions::dimer_sites())?;
        let spin = entanglement_of_particles(&g.mixture, &partitions::dimer_spins())?;
        let spin_modes = entanglement_of_modes(&g.mixture, &partitions::dimer_spins(), Measure::Entropy)?;
        let momentum = DensityMatrix::from_pure(&dimer_ground_momentum(1.0, u)?);
        let mom = entanglement_of_particles(&momentum, &partitions::dimer_momenta())?;
        println!(
            "{u:>6} {:>12.1e} {:>8.5} {:>8.5} {:>8.5} {:>10.1e} {:>10.6}",
            1.0 - g.eigenspace[0].fidelity(&exact),
            sites.p11(),
            dimer_p11(1.0, u),
            sites.posterior_11(),
            mom.total,
            spin.total
        );
        assert!((spin.total - spin_modes).abs() < 1e-10);
    }

    // cooling at fixed U/t: the posterior state approaches a singlet
    let solver = ThermalSolver::new(&hubbard_dimer(1.0, 4.0)?)?;
    for kt in [2.0, 1.0, 0.5, 0.2, 0.05] {
        let r = entanglement_of_particles(&solver.canonical(kt)?, &partitions::dimer_sites())?;
        println!(
            "U/t = 4, kT/t = {kt:>4}: P11 {:.4}, E_F {:.4}, E_P {:.4}",
            r.p11(),
            r.posterior_11(),
            r.total
        );
    }
    Ok(())
}
