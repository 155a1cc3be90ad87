//! Entanglement length of free electrons at T -> 0 from the projected
//! two-site matrix and from the spin-correlation matrix.

use epart::freefermion::{entanglement_length_for_filling, entanglement_length_sweep, MatrixKind};
use epart::thermal::chemical_potential_for_filling;

fn show(r: Option<usize>) -> String {
    r.map_or("inf".into(), |r| r.to_string())
}

fn main() -> epart::Result<()> {
    let m = 30;
    // 0.2 electrons per site on 30 sites: three occupied momenta per spin
    let sol = chemical_potential_for_filling(m, 1.0, 0.0, 0.1)?;
    println!("M={m}, 0.2 electrons per site: mu = {:.4}", sol.mu);
    for filling in [1.0 / 30.0, 0.1, 0.5] {
        let p = entanglement_length_for_filling(m, 1.0, 0.0, filling, MatrixKind::Projected)?;
        let s = entanglement_length_for_filling(m, 1.0, 0.0, filling, MatrixKind::Spin)?;
        println!("n = {filling:.4}: r_e projected {}, spin {}", show(p.r_e), show(s.r_e));
        if p.r_e.is_none() {
            let ef: Vec<String> = p.profile.iter().take(5).map(|x| format!("{:.3}", x.eof)).collect();
            println!("    posterior E_F at d = 1..5: {}", ef.join(" "));
        }
    }

    let fillings: Vec<f64> = (2..=10).map(|k| k as f64 / 100.0).collect();
    let sweep = entanglement_length_sweep(1000, 1.0, 0.0, &fillings, (0.02, 0.1))?;
    for row in &sweep.rows {
        println!("1/n = {:>5.1}: r_e {}", row.inverse_filling, show(row.r_projected));
    }
    if let Some(fit) = sweep.fit {
        println!(
            "r_e = {:.4} / n + {:.4}, R^2 = {:.5}",
            fit.slope, fit.intercept, fit.r_squared
        );
    }
    Ok(())
}
