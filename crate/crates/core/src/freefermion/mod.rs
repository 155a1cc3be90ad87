//! Two-site matrices of thermal non-interacting electrons on large rings,
//! built from correlation functions instead of a Fock-space state.
//!
//! Everything follows from two numbers per separation `d`: the filling
//! `nbar = <n_{j s}>` and the exchange correlation
//! `c(d) = <c_{j s}^dag c_{j+d, s}> = (1/M) sum_k e^{2 pi i d k / M} n_k`.

pub mod wick;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::density::two_site_entry_string;
use crate::fock::{spin_orbital, LocalState, Spin, TwoSiteMatrix};
use crate::linalg::{hermitian_eigenvalues, re, CMatrix};
use crate::measures::{concurrence, eof_two_qubit, werner_decompose, TwoQubitState};
use crate::thermal::{fermi_occupations, occupations_for_filling};

pub use wick::{pfaffian, GaussianState};

/// Filling and exchange correlation of a pair of sites.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationPair {
    nbar: f64,
    c: Complex64,
}

impl CorrelationPair {
    /// Requires `0 <= nbar <= 1` and `|c| <= min(nbar, 1 - nbar)`, the
    /// positivity of the two-site one-body matrix.
    pub fn new(nbar: f64, c: Complex64) -> Result<Self> {
        if !(0.0..=1.0).contains(&nbar) {
            return Err(Error::CorrelationInconsistency(format!(
                "filling {nbar} outside [0, 1]"
            )));
        }
        let bound = nbar.min(1.0 - nbar) + 1e-12;
        if c.norm() > bound {
            return Err(Error::CorrelationInconsistency(format!(
                "|c| = {} exceeds min(nbar, 1 - nbar) = {}",
                c.norm(),
                nbar.min(1.0 - nbar)
            )));
        }
        Ok(Self { nbar, c })
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn c(&self) -> Complex64 {
        self.c
    }

    /// One-body matrix `<c_i^dag c_j>` over modes `(A up, A dn, B up, B dn)`.
    pub fn one_body_matrix(&self) -> CMatrix {
        let mut g = CMatrix::zeros(4, 4);
        for s in [Spin::Up, Spin::Down] {
            let (a, b) = (spin_orbital(0, s), spin_orbital(1, s));
            g[(a, a)] = re(self.nbar);
            g[(b, b)] = re(self.nbar);
            g[(a, b)] = self.c;
            g[(b, a)] = self.c.conj();
        }
        g
    }
}

/// `nbar` and `c(d)` from band occupations `n_k`.
pub fn correlations_from_occupations(n: &[f64], d: usize) -> Result<CorrelationPair> {
    let m = n.len();
    if d == 0 || d >= m {
        return Err(Error::InvalidSeparation(d));
    }
    let nbar = n.iter().sum::<f64>() / m as f64;
    let step = 2.0 * std::f64::consts::PI * d as f64 / m as f64;
    let c: Complex64 = n
        .iter()
        .enumerate()
        .map(|(k, &nk)| Complex64::from_polar(nk, step * k as f64))
        .sum::<Complex64>()
        / re(m as f64);
    CorrelationPair::new(nbar, c)
}

/// Correlations at separation `d` for the grand-canonical ring.
pub fn correlations(m: usize, t: f64, temperature: f64, mu: f64, d: usize) -> Result<CorrelationPair> {
    correlations_from_occupations(&fermi_occupations(m, t, temperature, mu), d)
}

/// The one-particle-per-site block and its trace `P_{1,1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedTwoSite {
    pub matrix: CMatrix,
    pub weight: f64,
}

impl ProjectedTwoSite {
    pub fn normalized(&self) -> Result<TwoQubitState> {
        TwoQubitState::new(self.matrix.clone())
    }

    pub fn concurrence(&self) -> Result<f64> {
        Ok(concurrence(&self.normalized()?))
    }

    /// Entanglement of formation of the normalized state.
    pub fn eof(&self) -> Result<f64> {
        Ok(eof_two_qubit(&self.normalized()?))
    }

    /// Entanglement of particles of the two-site state between the sites.
    /// Every other local-number sector leaves one site with a single
    /// state, so this is `P_{1,1} E_F`.
    pub fn entanglement_of_particles(&self) -> Result<f64> {
        Ok(self.weight * self.eof()?)
    }
}

fn check_psd(m: &CMatrix) -> Result<()> {
    let min = hermitian_eigenvalues(m)[0];
    if min < -1e-10 {
        return Err(Error::CorrelationInconsistency(format!(
            "two-site matrix has eigenvalue {min:.3e}"
        )));
    }
    Ok(())
}

/// Closed-form projected two-site matrix over `(up up, up dn, dn up, dn dn)`:
/// `(n^2 - |c|^2)((1-n)^2 - |c|^2)` on the parallel-spin diagonal,
/// `(n(1-n) + |c|^2)^2` on the antiparallel diagonal and `-|c|^2` coupling
/// `up dn` with `dn up`.
pub fn projected_two_site(pair: &CorrelationPair) -> Result<ProjectedTwoSite> {
    let n = pair.nbar;
    let c2 = pair.c.norm_sqr();
    let parallel = (n * n - c2) * ((1.0 - n) * (1.0 - n) - c2);
    let anti = (n * (1.0 - n) + c2).powi(2);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = re(parallel);
    m[(3, 3)] = re(parallel);
    m[(1, 1)] = re(anti);
    m[(2, 2)] = re(anti);
    m[(1, 2)] = re(-c2);
    m[(2, 1)] = re(-c2);
    check_psd(&m)?;
    let weight = 2.0 * parallel + 2.0 * anti;
    Ok(ProjectedTwoSite { matrix: m, weight })
}

/// All 16x16 entries of the two-site matrix by Wick's theorem. Entries that
/// change the number of up or down electrons on the pair vanish.
pub fn full_two_site_matrix(pair: &CorrelationPair) -> Result<TwoSiteMatrix> {
    let state = GaussianState::new(pair.one_body_matrix());
    let spin_count = |a: LocalState, b: LocalState| {
        let up = |s: LocalState| matches!(s, LocalState::Up | LocalState::Double) as i32;
        let dn = |s: LocalState| matches!(s, LocalState::Down | LocalState::Double) as i32;
        (up(a) + up(b), dn(a) + dn(b))
    };
    let mut m = CMatrix::zeros(16, 16);
    for &ra in &LocalState::ALL {
        for &rb in &LocalState::ALL {
            for &ca in &LocalState::ALL {
                for &cb in &LocalState::ALL {
                    if spin_count(ra, rb) != spin_count(ca, cb) {
                        continue;
                    }
                    let s = two_site_entry_string(0, 1, (ra, rb), (ca, cb));
                    m[(TwoSiteMatrix::index(ra, rb), TwoSiteMatrix::index(ca, cb))] = state.expect(&s);
                }
            }
        }
    }
    check_psd(&m)?;
    Ok(TwoSiteMatrix { matrix: m })
}

/// Two-spin correlation matrix with its trace.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinCorrelationMatrix {
    pub matrix: CMatrix,
    pub weight: f64,
}

impl SpinCorrelationMatrix {
    /// The matrix normalized and treated as a two-qubit state.
    pub fn normalized(&self) -> Result<TwoQubitState> {
        TwoQubitState::new(self.matrix.clone())
    }

    pub fn concurrence(&self) -> Result<f64> {
        Ok(concurrence(&self.normalized()?))
    }
}

/// Spin element `(s t, s' t')` = site element `(s t, s' t')`, plus
/// `(s 2, s' 2)` when `t = t'`, plus `(2 t, 2 t')` when `s = s'`, plus
/// `(2 2, 2 2)` when both hold.
pub fn spin_matrix_from_two_site(full: &TwoSiteMatrix) -> SpinCorrelationMatrix {
    use LocalState::{Double, Down, Up};
    let mut m = CMatrix::zeros(4, 4);
    for (r, &(s, t)) in [(Up, Up), (Up, Down), (Down, Up), (Down, Down)].iter().enumerate() {
        for (col, &(s2, t2)) in [(Up, Up), (Up, Down), (Down, Up), (Down, Down)].iter().enumerate() {
            let mut v = full.get((s, t), (s2, t2));
            if t == t2 {
                v += full.get((s, Double), (s2, Double));
            }
            if s == s2 {
                v += full.get((Double, t), (Double, t2));
            }
            if s == s2 && t == t2 {
                v += full.get((Double, Double), (Double, Double));
            }
            m[(r, col)] = v;
        }
    }
    let weight = m.diagonal().iter().map(|z| z.re).sum();
    SpinCorrelationMatrix { matrix: m, weight }
}

pub fn spin_correlation_matrix(pair: &CorrelationPair) -> Result<SpinCorrelationMatrix> {
    Ok(spin_matrix_from_two_site(&full_two_site_matrix(pair)?))
}

/// Which 4x4 matrix feeds the concurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixKind {
    Projected,
    Spin,
}

/// Concurrence of the normalized projected or spin matrix of a pair.
pub fn pair_concurrence(pair: &CorrelationPair, kind: MatrixKind) -> Result<f64> {
    match kind {
        MatrixKind::Projected => projected_two_site(pair)?.concurrence(),
        MatrixKind::Spin => spin_correlation_matrix(pair)?.concurrence(),
    }
}

/// One separation of an entanglement-length scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationPoint {
    pub separation: usize,
    pub p11: f64,
    pub concurrence: f64,
    pub eof: f64,
    /// Singlet fidelity of the normalized projected matrix.
    pub singlet_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementLengthResult {
    /// First separation with zero concurrence; `None` when every separation
    /// up to `M/2` is entangled.
    pub r_e: Option<usize>,
    pub profile: Vec<SeparationPoint>,
}

/// Concurrences at or below this count as zero.
pub const ZERO_CONCURRENCE: f64 = 1e-12;

/// Scans `d = 1..=M/2` and stops at the first separable separation.
pub fn entanglement_length_from_occupations(
    n: &[f64],
    kind: MatrixKind,
    tolerance: f64,
) -> Result<EntanglementLengthResult> {
    let mut profile = Vec::new();
    for d in 1..=n.len() / 2 {
        let pair = correlations_from_occupations(n, d)?;
        let projected = projected_two_site(&pair)?;
        let state = projected.normalized()?;
        let conc = match kind {
            MatrixKind::Projected => concurrence(&state),
            MatrixKind::Spin => spin_correlation_matrix(&pair)?.concurrence()?,
        };
        let fidelity = werner_decompose(&state).map(|w| w.f).unwrap_or(f64::NAN);
        profile.push(SeparationPoint {
            separation: d,
            p11: projected.weight,
            concurrence: conc,
            eof: crate::measures::eof_from_concurrence(conc),
            singlet_fidelity: fidelity,
        });
        if conc <= tolerance {
            return Ok(EntanglementLengthResult { r_e: Some(d), profile });
        }
    }
    Ok(EntanglementLengthResult { r_e: None, profile })
}

/// Entanglement length of the grand-canonical ring at `(T, mu)`.
pub fn entanglement_length(
    m: usize,
    t: f64,
    temperature: f64,
    mu: f64,
    kind: MatrixKind,
) -> Result<EntanglementLengthResult> {
    entanglement_length_from_occupations(&fermi_occupations(m, t, temperature, mu), kind, ZERO_CONCURRENCE)
}

/// Entanglement length at a target filling (see
/// [`occupations_for_filling`] for the `T = 0` limit).
pub fn entanglement_length_for_filling(
    m: usize,
    t: f64,
    temperature: f64,
    filling: f64,
    kind: MatrixKind,
) -> Result<EntanglementLengthResult> {
    let n = occupations_for_filling(m, t, temperature, filling)?;
    entanglement_length_from_occupations(&n, kind, ZERO_CONCURRENCE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub filling: f64,
    pub inverse_filling: f64,
    pub r_projected: Option<usize>,
    pub r_spin: Option<usize>,
}

/// Least-squares line `y = slope x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub fn linear_fit(points: &[(f64, f64)]) -> Option<LinearFit> {
    let n = points.len();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
        points: n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementLengthSweep {
    pub rows: Vec<SweepRow>,
    /// Fit of the projected `r_e` against `1/nbar` over the fit window.
    pub fit: Option<LinearFit>,
}

/// Projected and spin-matrix entanglement lengths over a filling grid, with
/// a linear fit of `r_e` against `1/nbar` for fillings inside `fit_window`.
pub fn entanglement_length_sweep(
    m: usize,
    t: f64,
    temperature: f64,
    fillings: &[f64],
    fit_window: (f64, f64),
) -> Result<EntanglementLengthSweep> {
    let rows: Vec<SweepRow> = fillings
        .par_iter()
        .map(|&f| -> Result<SweepRow> {
            let n = occupations_for_filling(m, t, temperature, f)?;
            let p = entanglement_length_from_occupations(&n, MatrixKind::Projected, ZERO_CONCURRENCE)?;
            let s = entanglement_length_from_occupations(&n, MatrixKind::Spin, ZERO_CONCURRENCE)?;
            Ok(SweepRow {
                filling: f,
                inverse_filling: 1.0 / f,
                r_projected: p.r_e,
                r_spin: s.r_e,
            })
        })
        .collect::<Result<_>>()?;
    let points: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.filling >= fit_window.0 - 1e-12 && r.filling <= fit_window.1 + 1e-12)
        .filter_map(|r| r.r_projected.map(|x| (r.inverse_filling, x as f64)))
        .collect();
    Ok(EntanglementLengthSweep {
        rows,
        fit: linear_fit(&points),
    })
}
