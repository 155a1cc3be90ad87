//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when
//! any criterion fails. Runs without the libtest harness.

use std::sync::Arc;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use epart::fock::{
    enumerate_basis, local_sectors, project_local_number, Bipartition, DensityMatrix, Operator, ParticleKind,
};
use epart::freefermion::{
    correlations, entanglement_length, entanglement_length_for_filling, entanglement_length_from_occupations,
    entanglement_length_sweep, full_two_site_matrix, projected_two_site, spin_correlation_matrix, CorrelationPair,
    MatrixKind,
};
use epart::linalg::{hermitian_eigenvalues, max_abs_diff, unitary_from_generator, CMatrix};
use epart::measures::{
    binary_entropy, concurrence, entanglement_of_modes, entanglement_of_particles, negativity, twirl, Measure,
    TwoQubitState,
};
use epart::models::{
    bose_hubbard_ring, dimer_alpha, dimer_ground_analytic, dimer_ground_momentum, free_boson_ground, hubbard_dimer,
    partitions, spinful_fermion_lattice, spinless_fermion_ring, spinless_momentum_state,
};
use epart::thermal::{
    chemical_potential_for_filling, ground_state, occupations_for_filling, ThermalSolver, ThermalSpec,
};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|err| err.to_string())
}

fn hardcore_value() -> f64 {
    0.75 * binary_entropy(0.5 + 2f64.sqrt() / 3.0).unwrap()
}

fn hardcore_saturation() -> Check {
    let adj = partitions::ring_adjacent();
    let strong = e(ground_state(&e(bose_hubbard_ring(4, 1.0, 1e3, 2))?))?;
    let ep = e(entanglement_of_particles(&strong.mixture, &adj))?.total;
    ensure((ep - hardcore_value()).abs() < 1e-3, || format!("E_P(U/t=1e3) = {ep}"))?;
    ensure((hardcore_value() - 0.1405).abs() < 1e-4, || {
        format!("(3/4) h = {}", hardcore_value())
    })?;
    let free = e(ground_state(&e(bose_hubbard_ring(4, 1.0, 0.0, 2))?))?;
    let ep0 = e(entanglement_of_particles(&free.mixture, &adj))?.total;
    ensure(ep0.abs() < 1e-10, || format!("E_P(U=0) = {ep0}"))?;
    Ok(format!("E_P(U/t=1e3) = {ep:.5}, E_P(U=0) = {ep0:.1e}"))
}

fn free_boson_null() -> Check {
    let (mut worst_ep, mut min_em, mut count) = (0f64, f64::INFINITY, 0);
    for m in 2..=6 {
        for n in 1..=4 {
            let rho = DensityMatrix::from_pure(&e(free_boson_ground(m, n))?);
            for p in Bipartition::all_complete(m) {
                let ep = e(entanglement_of_particles(&rho, &p))?.total;
                let em = e(entanglement_of_modes(&rho, &p, Measure::Entropy))?;
                ensure(ep.abs() < 1e-10, || format!("M={m} N={n} {p:?}: E_P = {ep}"))?;
                ensure(em > 0.0, || format!("M={m} N={n} {p:?}: E_M = {em}"))?;
                worst_ep = worst_ep.max(ep.abs());
                min_em = min_em.min(em);
                count += 1;
            }
        }
    }
    Ok(format!(
        "{count} states x partitions, max |E_P| = {worst_ep:.1e}, min E_M = {min_em:.3}"
    ))
}

fn spinless_ring() -> Check {
    let adj = partitions::ring_adjacent();
    let diag = partitions::ring_diagonal();
    let expected = binary_entropy(0.5 + 2f64.sqrt() / 3.0).unwrap();
    let h = e(spinless_fermion_ring(4, 1.0, 2))?;
    let g = e(ground_state(&h))?;
    ensure(g.degeneracy() == 2, || format!("degeneracy {}", g.degeneracy()))?;
    let pure: Vec<DensityMatrix> = [[0, 1], [0, 3]]
        .iter()
        .map(|ks| spinless_momentum_state(4, ks).map(|s| DensityMatrix::from_pure(&s)))
        .collect::<Result<_, _>>()
        .map_err(|x| x.to_string())?;
    let neg = |rho: &DensityMatrix| -> Result<f64, String> {
        let view = e(rho.bipartite(&adj, Some((1, 1))))?;
        Ok(negativity(&view.normalized_matrix(), view.dim_a(), view.dim_b()))
    };
    for (name, rho) in [("g1", &pure[0]), ("g2", &pure[1]), ("mixture", &g.mixture)] {
        let r = e(entanglement_of_particles(rho, &adj))?;
        ensure((r.p11() - 0.75).abs() < 1e-10, || format!("{name}: P11 = {}", r.p11()))?;
        ensure((r.posterior_11() - expected).abs() < 1e-10, || {
            format!("{name}: E_F = {}", r.posterior_11())
        })?;
    }
    let solver = e(ThermalSolver::new(&h))?;
    for temperature in [0.0, 0.3, 1.0, 5.0] {
        let ep = e(entanglement_of_particles(&e(solver.canonical(temperature))?, &diag))?.total;
        ensure(ep.abs() < 1e-10, || format!("diagonal E_P at T={temperature}: {ep}"))?;
    }
    let (n_mix, n1, n2) = (neg(&g.mixture)?, neg(&pure[0])?, neg(&pure[1])?);
    ensure(n_mix < n1 && n_mix < n2, || {
        format!("negativity mixture {n_mix} vs pure {n1}, {n2}")
    })?;
    Ok(format!(
        "P11 = 3/4, E_F = {expected:.6}; negativity mixture {n_mix:.4} < pure {n1:.4}"
    ))
}

fn hubbard_dimer_checks() -> Check {
    let mut worst_overlap: f64 = 0.0;
    let mut p11s = Vec::new();
    for u in [0.0, 1.0, 3.0, 10.0, 100.0] {
        let g = e(ground_state(&e(hubbard_dimer(1.0, u))?))?;
        ensure(g.degeneracy() == 1, || {
            format!("U/t={u}: degeneracy {}", g.degeneracy())
        })?;
        let fid = g.eigenspace[0].fidelity(&e(dimer_ground_analytic(1.0, u))?);
        ensure(fid >= 1.0 - 1e-10, || format!("U/t={u}: overlap {fid}"))?;
        worst_overlap = worst_overlap.max(1.0 - fid);
        let sites = e(entanglement_of_particles(&g.mixture, &partitions::dimer_sites()))?;
        ensure((sites.posterior_11() - 1.0).abs() < 1e-10, || {
            format!("U/t={u}: posterior E_F {}", sites.posterior_11())
        })?;
        let a = dimer_alpha(u / 4.0);
        let p11 = a * a / (1.0 + a * a);
        ensure((sites.p11() - p11).abs() < 1e-10, || {
            format!("U/t={u}: P11 {} vs {p11}", sites.p11())
        })?;
        p11s.push(sites.p11());
        let momentum = DensityMatrix::from_pure(&e(dimer_ground_momentum(1.0, u))?);
        let ep_k = e(entanglement_of_particles(&momentum, &partitions::dimer_momenta()))?.total;
        ensure(ep_k.abs() < 1e-10, || format!("U/t={u}: momentum E_P {ep_k}"))?;
        let spin_p = e(entanglement_of_particles(&g.mixture, &partitions::dimer_spins()))?.total;
        let spin_m = e(entanglement_of_modes(
            &g.mixture,
            &partitions::dimer_spins(),
            Measure::Entropy,
        ))?;
        ensure((spin_p - spin_m).abs() < 1e-10, || {
            format!("U/t={u}: spin E_P {spin_p} vs E_M {spin_m}")
        })?;
    }
    ensure((p11s[0] - 0.5).abs() < 1e-10, || format!("P11(U=0) = {}", p11s[0]))?;
    ensure(p11s.windows(2).all(|w| w[1] > w[0]) && p11s[4] > 0.999, || {
        format!("P11 sequence {p11s:?}")
    })?;
    Ok(format!(
        "max 1-overlap {worst_overlap:.1e}, P11 from {:.3} to {:.5}",
        p11s[0], p11s[4]
    ))
}

fn oracle_equivalence() -> Check {
    let temps = [0.0, 0.05, 0.3, 1.0, 4.0];
    let mus = [-1.5, -0.7, 0.0, 0.6, 1.3];
    let mut worst: f64 = 0.0;
    let mut entries = 0usize;
    for m in [4, 5, 6] {
        let h = e(spinful_fermion_lattice(m, 1.0, true))?;
        let number = e(Operator::total_number(h.basis(), None))?;
        let solver = e(ThermalSolver::with_number(&h, &number))?;
        for &t in &temps {
            for &mu in &mus {
                let spec = ThermalSpec::grand_canonical(t, mu);
                for d in 1..m {
                    let ed = e(solver.two_site_matrix(&spec, 0, d))?;
                    let wick = e(full_two_site_matrix(&e(correlations(m, 1.0, t, mu, d))?))?;
                    let diff = max_abs_diff(&ed.matrix, &wick.matrix);
                    ensure(diff < 1e-8, || {
                        format!("M={m} T={t} mu={mu} d={d}: difference {diff:.2e}")
                    })?;
                    worst = worst.max(diff);
                    entries += 256;
                }
            }
        }
    }
    Ok(format!("{entries} entries, max difference {worst:.1e}"))
}

fn show(r: Option<usize>) -> String {
    r.map_or("inf".into(), |r| r.to_string())
}

fn entanglement_length_checks() -> Check {
    // 0.2 electrons per site: 0.1 per spin-orbital
    let sol = e(chemical_potential_for_filling(30, 1.0, 0.0, 0.1))?;
    let by_mu = e(entanglement_length(30, 1.0, 0.0, sol.mu, MatrixKind::Projected))?;
    ensure(by_mu.r_e == Some(5), || {
        format!("r_e at mu={} is {}", sol.mu, show(by_mu.r_e))
    })?;
    let by_filling = e(entanglement_length_for_filling(
        30,
        1.0,
        0.0,
        0.1,
        MatrixKind::Projected,
    ))?;
    ensure(by_filling.r_e == Some(5), || {
        format!("r_e at filling 0.1 is {}", show(by_filling.r_e))
    })?;
    let n = e(occupations_for_filling(30, 1.0, 0.0, 0.1))?;
    for tol in [1e-10, 1e-11, 1e-12, 1e-13, 1e-14] {
        let r = e(entanglement_length_from_occupations(&n, MatrixKind::Projected, tol))?;
        ensure(r.r_e == Some(5), || format!("tolerance {tol}: r_e {}", show(r.r_e)))?;
    }
    let pair = e(entanglement_length_for_filling(
        30,
        1.0,
        0.0,
        1.0 / 30.0,
        MatrixKind::Projected,
    ))?;
    ensure(pair.r_e.is_none(), || format!("filling 1/30: r_e {}", show(pair.r_e)))?;
    ensure(pair.profile.len() == 15, || {
        format!("profile length {}", pair.profile.len())
    })?;
    for p in &pair.profile {
        ensure((p.eof - 1.0).abs() < 1e-10, || {
            format!("filling 1/30, d={}: E_F {}", p.separation, p.eof)
        })?;
    }
    let mut grid: Vec<f64> = (45..=55).map(|k| k as f64 / 100.0).collect();
    grid.extend([14.0 / 30.0, 15.0 / 30.0, 16.0 / 30.0]);
    for &f in &grid {
        let p = e(entanglement_length_for_filling(30, 1.0, 0.0, f, MatrixKind::Projected))?;
        let s = e(entanglement_length_for_filling(30, 1.0, 0.0, f, MatrixKind::Spin))?;
        ensure(p.r_e == Some(2) && s.r_e == Some(1), || {
            format!("filling {f}: projected {}, spin {}", show(p.r_e), show(s.r_e))
        })?;
    }
    Ok(format!(
        "mu = {:.4} gives r_e = 5; filling 1/30 gives inf with E_F = 1; {} fillings near 1/2 give (2, 1)",
        sol.mu,
        grid.len()
    ))
}

fn scaling_laws() -> Check {
    let grid: Vec<f64> = (1..=99).map(|k| k as f64 / 100.0).collect();
    let sweep = e(entanglement_length_sweep(1000, 1.0, 0.0, &grid, (0.02, 0.1)))?;
    let fit = sweep.fit.ok_or("no fit")?;
    ensure(fit.points == 9, || format!("fit used {} points", fit.points))?;
    ensure(fit.r_squared > 0.99, || format!("R^2 = {}", fit.r_squared))?;
    let key = |x: Option<usize>| x.unwrap_or(usize::MAX);
    for (i, row) in sweep.rows.iter().enumerate() {
        let mirror = &sweep.rows[sweep.rows.len() - 1 - i];
        ensure(row.r_projected == mirror.r_projected, || {
            format!(
                "r_e({}) = {} but r_e({}) = {}",
                row.filling,
                show(row.r_projected),
                mirror.filling,
                show(mirror.r_projected)
            )
        })?;
        ensure(key(row.r_projected) >= key(row.r_spin), || {
            format!(
                "filling {}: projected {} < spin {}",
                row.filling,
                show(row.r_projected),
                show(row.r_spin)
            )
        })?;
    }
    Ok(format!(
        "M=1000: slope {:.4}, intercept {:.4}, R^2 = {:.5}; mirror and ordering hold on {} fillings",
        fit.slope,
        fit.intercept,
        fit.r_squared,
        grid.len()
    ))
}

fn thermal_onset() -> Check {
    let (t, u) = (0.02, 1.0);
    let solver = e(ThermalSolver::new(&e(bose_hubbard_ring(4, t, u, 2))?))?;
    let adj = partitions::ring_adjacent();
    let cold = e(entanglement_of_particles(&e(solver.canonical(t))?, &adj))?.total;
    let hot = e(entanglement_of_particles(
        &e(solver.canonical(10.0 * 2.0 * 2f64.sqrt() * t))?,
        &adj,
    ))?
    .total;
    ensure(cold > 1e-3, || format!("E_P(kT=t) = {cold}"))?;
    ensure(hot < 1e-6, || format!("E_P(kT=20 sqrt2 t) = {hot}"))?;
    Ok(format!("E_P(kT=t) = {cold:.4}, E_P(kT=10 gap) = {hot:.1e}"))
}

fn perturbative_energy() -> Check {
    let t = 1e-4;
    let g = e(ground_state(&e(bose_hubbard_ring(4, t, 1.0, 2))?))?;
    let ratio = g.energy / t;
    ensure((ratio + 2.0 * 2f64.sqrt()).abs() < 1e-3, || format!("E_g/t = {ratio}"))?;
    Ok(format!("E_g/t = {ratio:.6}"))
}

const CASES: u32 = 256;

fn runner() -> TestRunner {
    TestRunner::new_with_rng(
        RunnerConfig {
            cases: CASES,
            failure_persistence: None,
            ..RunnerConfig::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn valid_pair() -> impl Strategy<Value = CorrelationPair> {
    (0.001f64..0.999, 0.0f64..=1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(n, s, phase)| {
        let c = Complex64::from_polar(s * n.min(1.0 - n), phase);
        CorrelationPair::new(n, c).unwrap()
    })
}

fn random_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(-1.0f64..1.0, 2 * n * n)
        .prop_map(move |v| CMatrix::from_fn(n, n, |i, j| Complex64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1])))
}

fn random_density(n: usize) -> impl Strategy<Value = CMatrix> {
    random_matrix(n).prop_map(|a| {
        let m = &a * a.adjoint();
        let tr = m.trace();
        m / tr
    })
}

fn random_unitary(n: usize) -> impl Strategy<Value = CMatrix> {
    random_matrix(n).prop_map(|a| unitary_from_generator(&((&a + a.adjoint()) * Complex64::new(2.0, 0.0))))
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

fn invariant_suites() -> Check {
    let mut report = Vec::new();

    // projector completeness: the local-number sectors tile the sector-diagonal part of rho
    let fermions = Arc::new(enumerate_basis(ParticleKind::Fermion, 4, None).unwrap());
    let bosons = Arc::new(enumerate_basis(ParticleKind::Boson, 4, Some(2)).unwrap());
    let strategy = (any::<bool>(), random_density(16), 0usize..7);
    e(runner().run(&strategy, |(boson, dense, pick)| {
        let basis = if boson { bosons.clone() } else { fermions.clone() };
        let dim = basis.dim();
        let dense = dense.view((0, 0), (dim, dim)).into_owned();
        let dense = &dense / dense.trace();
        let rho = DensityMatrix::from_dense(&basis, dense.clone()).map_err(|x| fail(x.to_string()))?;
        let p = &Bipartition::all_complete(4)[pick];
        let mut total = CMatrix::zeros(dim, dim);
        let mut weight = 0.0;
        for (na, nb) in local_sectors(&basis, p) {
            let proj = project_local_number(&rho, p, na, nb).map_err(|x| fail(x.to_string()))?;
            let again = project_local_number(&proj, p, na, nb).map_err(|x| fail(x.to_string()))?;
            prop_assert!(max_abs_diff(&proj.to_dense(), &again.to_dense()) < 1e-14);
            weight += proj.weight();
            total += proj.to_dense();
        }
        let sector = |i: usize| (basis.state(i).count_on(p.a()), basis.state(i).count_on(p.b()));
        let expected = CMatrix::from_fn(dim, dim, |i, j| {
            if sector(i) == sector(j) {
                dense[(i, j)]
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        prop_assert!((weight - 1.0).abs() < 1e-12, "weights sum to {}", weight);
        prop_assert!(max_abs_diff(&total, &expected) < 1e-12);
        Ok(())
    }))?;
    report.push("completeness");

    // Hermiticity and positivity of the two-site matrices
    e(runner().run(&valid_pair(), |pair| {
        let full = full_two_site_matrix(&pair).map_err(|x| fail(x.to_string()))?;
        prop_assert!(max_abs_diff(&full.matrix, &full.matrix.adjoint()) < 1e-14);
        prop_assert!(hermitian_eigenvalues(&full.matrix)[0] > -1e-12);
        prop_assert!((full.trace() - 1.0).abs() < 1e-12);
        let proj = projected_two_site(&pair).map_err(|x| fail(x.to_string()))?;
        prop_assert!(hermitian_eigenvalues(&proj.matrix)[0] > -1e-12);
        let spin = spin_correlation_matrix(&pair).map_err(|x| fail(x.to_string()))?;
        prop_assert!(max_abs_diff(&spin.matrix, &spin.matrix.adjoint()) < 1e-14);
        prop_assert!(hermitian_eigenvalues(&spin.matrix)[0] > -1e-12);
        Ok(())
    }))?;
    report.push("hermitian/psd");

    // SU(2) twirl fixed point
    e(runner().run(&valid_pair(), |pair| {
        let proj = projected_two_site(&pair).map_err(|x| fail(x.to_string()))?;
        prop_assert!(max_abs_diff(&proj.matrix, &twirl(&proj.matrix)) < 1e-10);
        Ok(())
    }))?;
    report.push("twirl");

    // local-unitary invariance of the concurrence
    e(runner().run(
        &(random_density(4), random_unitary(2), random_unitary(2)),
        |(rho, ua, ub)| {
            let state = TwoQubitState::new(rho).map_err(|x| fail(x.to_string()))?;
            let c0 = concurrence(&state);
            let c1 = concurrence(&state.rotated(&ua, &ub));
            prop_assert!((c0 - c1).abs() < 1e-9, "{} vs {}", c0, c1);
            Ok(())
        },
    ))?;
    report.push("local-unitary");

    // spin-matrix concurrence bounded by the projected one
    e(runner().run(&valid_pair(), |pair| {
        let p = projected_two_site(&pair)
            .and_then(|x| x.concurrence())
            .map_err(|x| fail(x.to_string()))?;
        let s = spin_correlation_matrix(&pair)
            .and_then(|x| x.concurrence())
            .map_err(|x| fail(x.to_string()))?;
        prop_assert!(s <= p + 1e-12, "spin {} > projected {}", s, p);
        Ok(())
    }))?;
    report.push("spin bound");

    Ok(format!(
        "{} suites x {CASES} cases: {}",
        report.len(),
        report.join(", ")
    ))
}

fn main() {
    let criteria: [(u32, &str, Duration, fn() -> Check); 10] = [
        (1, "hardcore saturation", Duration::from_secs(1), hardcore_saturation),
        (2, "free-boson null", Duration::from_secs(10), free_boson_null),
        (3, "spinless-fermion ring", Duration::from_secs(1), spinless_ring),
        (4, "Hubbard dimer", Duration::from_secs(1), hubbard_dimer_checks),
        (5, "oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        (
            6,
            "entanglement length",
            Duration::from_secs(5),
            entanglement_length_checks,
        ),
        (7, "scaling laws", Duration::from_secs(30), scaling_laws),
        (8, "thermal onset", Duration::from_secs(10), thermal_onset),
        (9, "perturbative energy", Duration::from_secs(1), perturbative_energy),
        (10, "invariant suites", Duration::from_secs(60), invariant_suites),
    ];
    let mut failures = 0;
    for (n, name, limit, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {n}: PASS {name} ({detail}; {elapsed:.2?})"),
            Err(detail) => {
                failures += 1;
                println!("criterion {n}: FAIL {name} ({detail}; {elapsed:.2?})");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all 10 criteria passed");
}
