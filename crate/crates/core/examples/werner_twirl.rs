//! The projected two-site matrix of free electrons is a Werner state: it is
//! fixed by the collective SU(2) twirl, and singlet fidelity above 1/2 is
//! exactly when it is entangled.

use epart::freefermion::{correlations, projected_two_site};
use epart::linalg::max_abs_diff;
use epart::measures::{twirl, werner_decompose};

fn main() -> epart::Result<()> {
    let (m, mu) = (30, -1.0);
    println!("{:>3} {:>9} {:>10} {:>9} {:>10}", "d", "P11", "fidelity", "p", "C");
    for d in 1..=6 {
        let p = projected_two_site(&correlations(m, 1.0, 0.05, mu, d)?)?;
        let state = p.normalized()?;
        let w = werner_decompose(&state)?;
        assert!(max_abs_diff(state.matrix(), &twirl(state.matrix())) < 1e-12);
        println!(
            "{d:>3} {:>9.5} {:>10.5} {:>9.5} {:>10.5}",
            p.weight,
            w.f,
            w.p(),
            p.concurrence()?
        );
    }
    Ok(())
}
