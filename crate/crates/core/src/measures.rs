//! Entanglement measures and the entanglement of particles.
//!
//! `E_P = sum_{nA,nB} P_{nA,nB} E_M(rho^(nA,nB) / P_{nA,nB})`, where
//! `rho^(nA,nB)` is the state projected onto definite local particle
//! numbers. The per-sector `E_M` is zero when either party's sector space is
//! one-dimensional, the von Neumann entropy of one party for pure sectors,
//! and the two-qubit entanglement of formation for mixed `(1,1)` sectors
//! with two modes per party. Other sectors are reported as unsupported.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fock::{local_sectors, project_local_number, BipartiteState, Bipartition, DensityMatrix};
use crate::linalg::{hermitian_eigen, hermitian_eigenvalues, max_abs_diff, re, CMatrix, CVector, ZERO};

/// Eigenvalues in `[-1e-10, 0)` are treated as zero.
const CLIP: f64 = 1e-10;
/// Concurrence below this is round-off of an exactly separable state.
const CONCURRENCE_FLOOR: f64 = 1e-14;
/// Eigenvalues of a two-qubit state below this fraction of the largest are
/// round-off and dropped from its support.
const SUPPORT_TOL: f64 = 1e-14;

/// `h(x) = -x log2 x - (1-x) log2 (1-x)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&x) {
        return Err(Error::Domain(format!("binary entropy argument {x} outside [0, 1]")));
    }
    let x = x.clamp(0.0, 1.0);
    Ok(entropy_term(x) + entropy_term(1.0 - x))
}

fn entropy_term(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.log2()
    }
}

/// Shannon entropy (bits) of a spectrum, clipping small negative values.
pub fn entropy_of_spectrum(values: &[f64]) -> f64 {
    values
        .iter()
        .map(|&v| entropy_term(if v < 0.0 && v >= -CLIP { 0.0 } else { v }))
        .sum::<f64>()
}

/// `-Tr rho log2 rho` of a normalized matrix.
pub fn von_neumann_entropy(rho: &CMatrix) -> f64 {
    entropy_of_spectrum(&hermitian_eigenvalues(rho))
}

/// Normalized two-qubit state over `(up up, up dn, dn up, dn dn)` together
/// with the trace it had before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitState {
    matrix: CMatrix,
    weight: f64,
}

impl TwoQubitState {
    /// Normalizes `matrix` and records its trace as the weight.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (4, 4) {
            return Err(Error::DimensionMismatch {
                expected: 4,
                found: matrix.nrows(),
            });
        }
        let h = max_abs_diff(&matrix, &matrix.adjoint());
        if h > 1e-12 {
            return Err(Error::NotHermitian(h));
        }
        let weight: f64 = matrix.diagonal().iter().map(|z| z.re).sum();
        if weight <= 0.0 {
            return Err(Error::Domain("two-qubit state with zero weight".into()));
        }
        let matrix = matrix / re(weight);
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -CLIP {
            return Err(Error::Domain(format!("two-qubit state has eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix, weight })
    }

    pub fn from_pure(amplitudes: [num_complex::Complex64; 4]) -> Result<Self> {
        let v = CVector::from_row_slice(&amplitudes);
        Self::new(&v * v.adjoint())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Conjugation by a local unitary `u_a (x) u_b`.
    pub fn rotated(&self, u_a: &CMatrix, u_b: &CMatrix) -> Self {
        let u = u_a.kronecker(u_b);
        Self {
            matrix: &u * &self.matrix * u.adjoint(),
            weight: self.weight,
        }
    }
}

fn sigma_yy() -> CMatrix {
    // sigma_y (x) sigma_y in the (00, 01, 10, 11) basis
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 3)] = re(-1.0);
    m[(3, 0)] = re(-1.0);
    m[(1, 2)] = re(1.0);
    m[(2, 1)] = re(1.0);
    m
}

/// Wootters concurrence `max(0, l1 - l2 - l3 - l4)`, with `l_i` the
/// decreasing eigenvalues of `sqrt(sqrt(rho) rho~ sqrt(rho))`.
///
/// Evaluated as the singular values of `W^T (sigma_y x sigma_y) W` for
/// `rho = W W^dag` on its numerical support, which keeps exactly vanishing
/// `l_i` at round-off level instead of the square root of it.
pub fn concurrence(state: &TwoQubitState) -> f64 {
    let (values, vectors) = hermitian_eigen(state.matrix());
    let top = values.iter().fold(0.0f64, |a, &v| a.max(v));
    let columns: Vec<CVector> = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > SUPPORT_TOL * top)
        .map(|(k, &v)| vectors.column(k) * re(v.sqrt()))
        .collect();
    if columns.is_empty() {
        return 0.0;
    }
    let w = CMatrix::from_columns(&columns);
    let tau = w.transpose() * sigma_yy() * &w;
    let mut l: Vec<f64> = tau.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    let c = l[0] - l[1..].iter().sum::<f64>();
    if c < CONCURRENCE_FLOOR {
        0.0
    } else {
        c.min(1.0)
    }
}

/// `E_F = h((1 + sqrt(1 - C^2)) / 2)`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    let x = 0.5 * (1.0 + (1.0 - c * c).max(0.0).sqrt());
    binary_entropy(x).expect("argument in [1/2, 1]")
}

pub fn eof_two_qubit(state: &TwoQubitState) -> f64 {
    eof_from_concurrence(concurrence(state))
}

/// Sum of the magnitudes of the negative eigenvalues of the partial
/// transpose (on B) of a normalized `dim_a * dim_b` matrix.
pub fn negativity(rho: &CMatrix, dim_a: usize, dim_b: usize) -> f64 {
    let pt = crate::fock::partial_transpose_b(rho, dim_a, dim_b);
    hermitian_eigenvalues(&pt)
        .into_iter()
        .filter(|&v| v < 0.0)
        .map(|v| -v)
        .sum()
}

pub fn negativity_two_qubit(state: &TwoQubitState) -> f64 {
    negativity(state.matrix(), 2, 2)
}

/// Restricts `rho` to the modes of `partition` (tracing out the rest), with
/// A's modes renumbered first.
fn restrict(rho: &DensityMatrix, partition: &Bipartition) -> Result<(DensityMatrix, Bipartition)> {
    partition.validate_for(rho.basis().modes())?;
    if partition.is_complete(rho.basis().modes()) {
        return Ok((rho.clone(), partition.clone()));
    }
    let keep: Vec<usize> = partition.a().iter().chain(partition.b()).copied().collect();
    Ok((rho.reduce_to_modes(&keep)?, partition.relabeled()))
}

/// Maps a state with one particle in each of two two-mode parties onto two
/// qubits: local occupations `(1,0)` and `(0,1)` become logical 0 and 1.
pub fn qubit_reduce(rho: &DensityMatrix, partition: &Bipartition) -> Result<TwoQubitState> {
    if partition.a().len() != 2 || partition.b().len() != 2 {
        return Err(Error::UnsupportedReduction(format!(
            "qubit reduction needs two modes per party, got {} and {}",
            partition.a().len(),
            partition.b().len()
        )));
    }
    let (rho, p) = restrict(rho, partition)?;
    qubits_from_view(&rho.bipartite(&p, None)?)
}

fn qubits_from_view(view: &BipartiteState) -> Result<TwoQubitState> {
    let logical = |pat: &Vec<u32>| match pat.as_slice() {
        [1, 0] => Some(0usize),
        [0, 1] => Some(1usize),
        _ => None,
    };
    let db = view.dim_b();
    let mut m = CMatrix::zeros(4, 4);
    for (ia, pa) in view.patterns_a.iter().enumerate() {
        for (ib, pb) in view.patterns_b.iter().enumerate() {
            let row = ia * db + ib;
            let q = match (logical(pa), logical(pb)) {
                (Some(x), Some(y)) => 2 * x + y,
                _ => {
                    if view.matrix[(row, row)].norm() > 1e-14 {
                        return Err(Error::UnsupportedReduction(format!(
                            "state has weight outside the one-particle-per-party sector ({pa:?}, {pb:?})"
                        )));
                    }
                    continue;
                }
            };
            for (ja, qa) in view.patterns_a.iter().enumerate() {
                for (jb, qb) in view.patterns_b.iter().enumerate() {
                    if let (Some(x), Some(y)) = (logical(qa), logical(qb)) {
                        m[(q, 2 * x + y)] = view.matrix[(row, ja * db + jb)];
                    }
                }
            }
        }
    }
    TwoQubitState::new(m)
}

/// Measure applied to the mode bipartition directly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Eof,
    Entropy,
    Negativity,
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eof" => Ok(Measure::Eof),
            "entropy" => Ok(Measure::Entropy),
            "negativity" => Ok(Measure::Negativity),
            other => Err(Error::InvalidParameter(format!("unknown measure `{other}`"))),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Eof => "eof",
            Measure::Entropy => "entropy",
            Measure::Negativity => "negativity",
        })
    }
}

fn is_pure(values: &[f64], weight: f64) -> bool {
    values.last().is_some_and(|&top| top >= weight * (1.0 - 1e-10))
}

/// Entanglement of modes between A and B.
pub fn entanglement_of_modes(rho: &DensityMatrix, partition: &Bipartition, measure: Measure) -> Result<f64> {
    let (rho, p) = restrict(rho, partition)?;
    let rho = rho.normalized()?;
    let pure = is_pure(&rho.eigenvalues(), 1.0);
    let view = rho.bipartite(&p, None)?;
    match measure {
        Measure::Negativity => Ok(negativity(&view.matrix, view.dim_a(), view.dim_b())),
        Measure::Entropy | Measure::Eof if pure => Ok(von_neumann_entropy(&view.reduced_a())),
        Measure::Entropy => Err(Error::UnsupportedMeasure(
            "entropy of entanglement is defined for pure states only".into(),
        )),
        Measure::Eof => {
            if p.a().len() == 2 && p.b().len() == 2 {
                if let Ok(q) = qubits_from_view(&view) {
                    return Ok(eof_two_qubit(&q));
                }
            }
            Err(Error::UnsupportedMeasure(
                "entanglement of formation of a mixed state is only available for two effective qubits".into(),
            ))
        }
    }
}

/// One term of the entanglement of particles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorEntanglement {
    pub n_a: usize,
    pub n_b: usize,
    /// `P_{nA,nB}`.
    pub weight: f64,
    /// `E_M` of the normalized projected state.
    pub entanglement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EPReport {
    pub total: f64,
    pub sectors: Vec<SectorEntanglement>,
}

impl EPReport {
    pub fn sector(&self, n_a: usize, n_b: usize) -> Option<&SectorEntanglement> {
        self.sectors.iter().find(|s| s.n_a == n_a && s.n_b == n_b)
    }

    /// `P_{nA,nB}`, zero for absent sectors.
    pub fn probability(&self, n_a: usize, n_b: usize) -> f64 {
        self.sector(n_a, n_b).map_or(0.0, |s| s.weight)
    }

    pub fn p11(&self) -> f64 {
        self.probability(1, 1)
    }

    /// Entanglement of the normalized one-particle-per-party state.
    pub fn posterior_11(&self) -> f64 {
        self.sector(1, 1).map_or(0.0, |s| s.entanglement)
    }

    /// `sum P E_M` recomputed in sector order.
    pub fn recomputed_total(&self) -> f64 {
        self.sectors.iter().fold(0.0, |acc, s| acc + s.weight * s.entanglement)
    }
}

/// Sectors lighter than this are dropped from the report.
const NEGLIGIBLE: f64 = 1e-15;

/// Entanglement of particles of `rho` for the given partition.
pub fn entanglement_of_particles(rho: &DensityMatrix, partition: &Bipartition) -> Result<EPReport> {
    let (rho, p) = restrict(rho, partition)?;
    let rho = rho.normalized()?;
    let mut sectors = Vec::new();
    for (n_a, n_b) in local_sectors(rho.basis(), &p) {
        let projected = project_local_number(&rho, &p, n_a, n_b)?;
        let weight = projected.weight();
        if weight <= NEGLIGIBLE {
            continue;
        }
        let entanglement = sector_entanglement(&projected, &p, n_a, n_b)?;
        sectors.push(SectorEntanglement {
            n_a,
            n_b,
            weight,
            entanglement,
        });
    }
    let total = sectors.iter().fold(0.0, |acc, s| acc + s.weight * s.entanglement);
    Ok(EPReport { total, sectors })
}

fn sector_entanglement(projected: &DensityMatrix, p: &Bipartition, n_a: usize, n_b: usize) -> Result<f64> {
    let view = projected.bipartite(p, Some((n_a, n_b)))?;
    if view.dim_a() <= 1 || view.dim_b() <= 1 {
        return Ok(0.0);
    }
    let normalized = view.normalized_matrix();
    let (values, _) = hermitian_eigen(&normalized);
    if is_pure(&values, 1.0) {
        let reduced = crate::fock::partial_trace_b(&normalized, view.dim_a(), view.dim_b());
        return Ok(von_neumann_entropy(&reduced));
    }
    if (n_a, n_b) == (1, 1) && p.a().len() == 2 && p.b().len() == 2 {
        return Ok(eof_two_qubit(&qubits_from_view(&view)?));
    }
    Err(Error::UnsupportedSector {
        n_a,
        n_b,
        reason: format!(
            "mixed sector with local dimensions {}x{} has no closed-form measure",
            view.dim_a(),
            view.dim_b()
        ),
    })
}

/// Singlet `(|up dn> - |dn up>)/sqrt(2)`.
pub fn singlet() -> CVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVector::from_row_slice(&[ZERO, re(s), re(-s), ZERO])
}

/// Singlet fidelity `<s| rho |s>`.
pub fn singlet_fidelity(rho: &CMatrix) -> f64 {
    let s = singlet();
    s.dotc(&(rho * &s)).re
}

/// Werner state with singlet fidelity `f`.
pub fn werner_state(f: f64) -> CMatrix {
    let s = singlet();
    let ps = &s * s.adjoint();
    let rest = CMatrix::identity(4, 4) - &ps;
    ps * re(f) + rest * re((1.0 - f) / 3.0)
}

/// Average over collective rotations `U (x) U`, which keeps only the
/// singlet fidelity: `f |s><s| + (1 - f)/3 (1 - |s><s|)` for trace-one input.
pub fn twirl(rho: &CMatrix) -> CMatrix {
    let tr: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    werner_state(singlet_fidelity(rho) / tr) * re(tr)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerDecomposition {
    /// Singlet fidelity.
    pub f: f64,
    /// Weight of the antisymmetric (singlet) projector.
    pub p_a: f64,
    /// Weight of the symmetric (triplet) projector.
    pub p_s: f64,
}

impl WernerDecomposition {
    /// Singlet weight in the `p |s><s| + (1 - p) 1/4` parametrization.
    pub fn p(&self) -> f64 {
        (4.0 * self.f - 1.0) / 3.0
    }

    pub fn is_entangled(&self) -> bool {
        self.f > 0.5
    }
}

/// Decomposes a Werner-form state as `p_A Pi_A + (p_S / 3) Pi_S`.
pub fn werner_decompose(state: &TwoQubitState) -> Result<WernerDecomposition> {
    let rho = state.matrix();
    let distance = max_abs_diff(rho, &twirl(rho));
    if distance > 1e-8 {
        return Err(Error::NotWerner { distance });
    }
    let f = singlet_fidelity(rho);
    Ok(WernerDecomposition {
        f,
        p_a: f,
        p_s: 1.0 - f,
    })
}
