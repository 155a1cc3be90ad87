//! Ground, canonical and grand-canonical states, and Fermi occupations of
//! the non-interacting ring.
//!
//! Spectra are computed per connected block of the Hamiltonian's sparsity
//! graph. For the models here the blocks are the conserved-number sectors,
//! so a full-Fock-space spinful lattice of 6 sites splits into blocks of at
//! most 400 states.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::density::two_site_entry_string;
use crate::fock::operator::{apply_factors, Factor};
use crate::fock::{DensityMatrix, FockBasis, LocalState, Operator, StateVector, TwoSiteMatrix};
use crate::linalg::{hermitian_eigen, lanczos_lowest, re, CMatrix, CVector, SparseMatrix, ZERO};
use crate::models::band_energies;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Largest block handed to the dense eigensolver.
    pub dense_limit: usize,
    /// Relative tolerance for grouping eigenvalues into one multiplet.
    pub degeneracy_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            dense_limit: 4096,
            degeneracy_tol: 1e-9,
        }
    }
}

impl SolverOptions {
    fn same_level(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.degeneracy_tol * a.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ensemble {
    Ground,
    Canonical,
    GrandCanonical,
}

/// Temperature, chemical potential and ensemble of a thermal state.
/// `k_B = 1`, so `temperature` is in the Hamiltonian's energy unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalSpec {
    pub temperature: f64,
    pub mu: Option<f64>,
    pub ensemble: Ensemble,
}

impl ThermalSpec {
    pub fn ground() -> Self {
        Self {
            temperature: 0.0,
            mu: None,
            ensemble: Ensemble::Ground,
        }
    }

    pub fn canonical(temperature: f64) -> Self {
        Self {
            temperature,
            mu: None,
            ensemble: Ensemble::Canonical,
        }
    }

    pub fn grand_canonical(temperature: f64, mu: f64) -> Self {
        Self {
            temperature,
            mu: Some(mu),
            ensemble: Ensemble::GrandCanonical,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || self.temperature.is_infinite() {
            return Err(Error::InvalidParameter(format!(
                "temperature must be finite and non-negative, got {}",
                self.temperature
            )));
        }
        if self.ensemble == Ensemble::GrandCanonical && !self.mu.is_some_and(f64::is_finite) {
            return Err(Error::InvalidParameter(
                "the grand-canonical ensemble needs a finite chemical potential".into(),
            ));
        }
        Ok(())
    }
}

/// Connected components of the off-diagonal sparsity graph, each sorted,
/// ordered by smallest member.
pub fn connected_blocks(h: &SparseMatrix) -> Vec<Vec<usize>> {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (r, c, _) in h.triplets() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

/// Eigen-decomposition of one block.
#[derive(Debug, Clone)]
pub struct SpectralBlock {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the block's local index order.
    pub vectors: CMatrix,
    /// Particle number of the block, when a number operator was supplied.
    pub particles: Option<f64>,
}

/// Full spectrum of a Hamiltonian, block by block.
#[derive(Debug, Clone)]
pub struct Spectrum {
    basis: Arc<FockBasis>,
    blocks: Vec<SpectralBlock>,
    options: SolverOptions,
}

impl Spectrum {
    pub fn compute(h: &Operator, options: SolverOptions) -> Result<Self> {
        check_hermitian(h)?;
        let sparse = h.sparse();
        let mut position = vec![None; h.dim()];
        let mut blocks = Vec::new();
        for indices in connected_blocks(sparse) {
            if indices.len() > options.dense_limit {
                return Err(Error::BlockTooLarge {
                    dim: indices.len(),
                    limit: options.dense_limit,
                });
            }
            for (l, &i) in indices.iter().enumerate() {
                position[i] = Some(l);
            }
            let dense = sparse.principal_submatrix(&indices, &position);
            for &i in &indices {
                position[i] = None;
            }
            let (values, vectors) = hermitian_eigen(&dense);
            blocks.push(SpectralBlock {
                indices,
                values,
                vectors,
                particles: None,
            });
        }
        Ok(Self {
            basis: Arc::clone(h.basis()),
            blocks,
            options,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn blocks(&self) -> &[SpectralBlock] {
        &self.blocks
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.blocks.iter().flat_map(|b| b.values.iter().copied()).collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Attaches the particle number of every block. `number` must be
    /// diagonal in the basis and commute with the Hamiltonian.
    fn attach_number(&mut self, number: &Operator) -> Result<()> {
        let n = number.sparse();
        if n.triplets().any(|(r, c, v)| r != c && v != ZERO) {
            return Err(Error::InvalidParameter(
                "the number operator must be diagonal in the Fock basis".into(),
            ));
        }
        for b in &mut self.blocks {
            let first = n.get(b.indices[0], b.indices[0]).re;
            if b.indices.iter().any(|&i| (n.get(i, i).re - first).abs() > 1e-12) {
                return Err(Error::NotCommuting(1.0));
            }
            b.particles = Some(first);
        }
        Ok(())
    }

    /// Normalized Boltzmann weights of every eigenvector for energies
    /// `E - mu N`. `T = 0` gives equal weights on the lowest multiplet.
    fn weights(&self, temperature: f64, mu: Option<f64>) -> Result<Vec<Vec<f64>>> {
        let shifted: Vec<Vec<f64>> = self
            .blocks
            .iter()
            .map(|b| {
                let shift = match (mu, b.particles) {
                    (Some(m), Some(n)) => m * n,
                    _ => 0.0,
                };
                b.values.iter().map(|e| e - shift).collect()
            })
            .collect();
        if mu.is_some() && self.blocks.iter().any(|b| b.particles.is_none()) {
            return Err(Error::InvalidParameter(
                "grand-canonical weights need a number operator".into(),
            ));
        }
        let e_min = shifted.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let mut w: Vec<Vec<f64>> = if temperature == 0.0 {
            shifted
                .iter()
                .map(|v| {
                    v.iter()
                        .map(|&e| if self.options.same_level(e, e_min) { 1.0 } else { 0.0 })
                        .collect()
                })
                .collect()
        } else {
            shifted
                .iter()
                .map(|v| v.iter().map(|&e| (-(e - e_min) / temperature).exp()).collect())
                .collect()
        };
        let z: f64 = w.iter().flatten().sum();
        for v in &mut w {
            for x in v.iter_mut() {
                *x /= z;
            }
        }
        Ok(w)
    }

    fn density(&self, weights: &[Vec<f64>]) -> Result<DensityMatrix> {
        let mut blocks = Vec::new();
        for (b, w) in self.blocks.iter().zip(weights) {
            let keep: Vec<usize> = (0..w.len()).filter(|&k| w[k] > 0.0).collect();
            if keep.is_empty() {
                continue;
            }
            let d = b.indices.len();
            let mut scaled = CMatrix::zeros(d, keep.len());
            let mut plain = CMatrix::zeros(d, keep.len());
            for (col, &k) in keep.iter().enumerate() {
                let s = re(w[k]);
                for r in 0..d {
                    plain[(r, col)] = b.vectors[(r, k)];
                    scaled[(r, col)] = b.vectors[(r, k)] * s;
                }
            }
            blocks.push((b.indices.clone(), scaled * plain.adjoint()));
        }
        DensityMatrix::from_blocks(&self.basis, blocks)
    }

    /// `sum_n w_n <n| S |n>` for an operator string `S` mapping basis states
    /// to basis states.
    fn expect_factors(&self, weights: &[Vec<f64>], factors: &[Factor]) -> Complex64 {
        let mut acc = ZERO;
        let mut scratch = vec![0u32; self.basis.modes()];
        for (b, w) in self.blocks.iter().zip(weights) {
            // S|a> = amp |j>, both local to this block
            let mut moves = Vec::new();
            for (la, &a) in b.indices.iter().enumerate() {
                scratch.copy_from_slice(self.basis.state(a).occupations());
                if let Some(amp) = apply_factors(self.basis.kind(), &mut scratch, factors) {
                    if let Some(j) = self.basis.index_of(&scratch) {
                        if let Ok(lj) = b.indices.binary_search(&j) {
                            moves.push((la, lj, amp));
                        }
                    }
                }
            }
            if moves.is_empty() {
                continue;
            }
            for (k, &wk) in w.iter().enumerate() {
                if wk == 0.0 {
                    continue;
                }
                let v = b.vectors.column(k);
                let s: Complex64 = moves.iter().map(|&(la, lj, amp)| v[lj].conj() * v[la] * amp).sum();
                acc += s * wk;
            }
        }
        acc
    }
}

fn check_hermitian(h: &Operator) -> Result<()> {
    let d = h.hermiticity_defect();
    if d > 1e-12 {
        return Err(Error::NotHermitian(d));
    }
    Ok(())
}

/// Lowest energy, an orthonormal basis of its eigenspace, and the equal
/// mixture over that eigenspace.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub eigenspace: Vec<StateVector>,
    pub mixture: DensityMatrix,
}

impl GroundState {
    pub fn degeneracy(&self) -> usize {
        self.eigenspace.len()
    }
}

/// Ground multiplet of `h`. Blocks above `options.dense_limit` are handled by
/// deflated Lanczos.
pub fn ground_state_with(h: &Operator, options: SolverOptions) -> Result<GroundState> {
    check_hermitian(h)?;
    let basis = h.basis();
    let sparse = h.sparse();
    let mut position = vec![None; h.dim()];
    let mut candidates: Vec<(f64, StateVector)> = Vec::new();
    for indices in connected_blocks(sparse) {
        for (l, &i) in indices.iter().enumerate() {
            position[i] = Some(l);
        }
        let local: Vec<(f64, CVector)> = if indices.len() <= options.dense_limit {
            let dense = sparse.principal_submatrix(&indices, &position);
            let (values, vectors) = hermitian_eigen(&dense);
            let e0 = values[0];
            values
                .iter()
                .enumerate()
                .take_while(|(_, &e)| options.same_level(e, e0))
                .map(|(k, &e)| (e, vectors.column(k).into_owned()))
                .collect()
        } else {
            let sub = SparseMatrix::from_triplets(
                indices.len(),
                indices.len(),
                indices.iter().enumerate().flat_map(|(lr, &r)| {
                    let position = &position;
                    sparse
                        .row(r)
                        .filter_map(move |(c, v)| position[c].map(|lc| (lr, lc, v)))
                }),
            );
            lanczos_multiplet(&sub, &options)
        };
        for &i in &indices {
            position[i] = None;
        }
        for (e, v) in local {
            let mut full = CVector::zeros(h.dim());
            for (l, &i) in indices.iter().enumerate() {
                full[i] = v[l];
            }
            candidates.push((e, StateVector::new(basis, full)?));
        }
    }
    let e0 = candidates.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    let eigenspace: Vec<StateVector> = candidates
        .into_iter()
        .filter(|(e, _)| options.same_level(*e, e0))
        .map(|(_, v)| v)
        .collect();
    let p = 1.0 / eigenspace.len() as f64;
    let ensemble: Vec<(f64, &StateVector)> = eigenspace.iter().map(|v| (p, v)).collect();
    let mixture = DensityMatrix::from_ensemble(basis, &ensemble)?;
    Ok(GroundState {
        energy: e0,
        eigenspace,
        mixture,
    })
}

pub fn ground_state(h: &Operator) -> Result<GroundState> {
    ground_state_with(h, SolverOptions::default())
}

fn lanczos_multiplet(h: &SparseMatrix, options: &SolverOptions) -> Vec<(f64, CVector)> {
    let mut found: Vec<(f64, CVector)> = Vec::new();
    loop {
        let deflate: Vec<CVector> = found.iter().map(|f| f.1.clone()).collect();
        if deflate.len() == h.nrows() {
            break;
        }
        let r = lanczos_lowest(h, &deflate, 1e-11, 0x5eed + found.len() as u64);
        if let Some((e0, _)) = found.first() {
            if !options.same_level(r.value, *e0) {
                break;
            }
        }
        found.push((r.value, r.vector));
    }
    found
}

/// Reusable spectral decomposition for evaluating many thermal states of the
/// same Hamiltonian.
#[derive(Debug, Clone)]
pub struct ThermalSolver {
    spectrum: Spectrum,
}

impl ThermalSolver {
    pub fn new(h: &Operator) -> Result<Self> {
        Self::with_options(h, None, SolverOptions::default())
    }

    /// Solver that also supports grand-canonical states; `number` must be
    /// diagonal and commute with `h`.
    pub fn with_number(h: &Operator, number: &Operator) -> Result<Self> {
        Self::with_options(h, Some(number), SolverOptions::default())
    }

    pub fn with_options(h: &Operator, number: Option<&Operator>, options: SolverOptions) -> Result<Self> {
        let mut spectrum = Spectrum::compute(h, options)?;
        if let Some(n) = number {
            let defect = h.commutator(n)?.max_abs();
            if defect > 1e-12 {
                return Err(Error::NotCommuting(defect));
            }
            spectrum.attach_number(n)?;
        }
        Ok(Self { spectrum })
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    fn weights(&self, spec: &ThermalSpec) -> Result<Vec<Vec<f64>>> {
        spec.validate()?;
        match spec.ensemble {
            Ensemble::Ground => self.spectrum.weights(0.0, None),
            Ensemble::Canonical => self.spectrum.weights(spec.temperature, None),
            Ensemble::GrandCanonical => self.spectrum.weights(spec.temperature, spec.mu),
        }
    }

    pub fn state(&self, spec: &ThermalSpec) -> Result<DensityMatrix> {
        self.spectrum.density(&self.weights(spec)?)
    }

    /// `exp(-H/T)/Z`; `T = 0` gives the ground mixture.
    pub fn canonical(&self, temperature: f64) -> Result<DensityMatrix> {
        self.state(&ThermalSpec::canonical(temperature))
    }

    /// `exp(-(H - mu N)/T)/Z`.
    pub fn grand_canonical(&self, temperature: f64, mu: f64) -> Result<DensityMatrix> {
        self.state(&ThermalSpec::grand_canonical(temperature, mu))
    }

    /// Thermal expectation value of an operator.
    pub fn expectation(&self, spec: &ThermalSpec, op: &Operator) -> Result<Complex64> {
        Ok(self.state(spec)?.expectation(op))
    }

    /// Two-site reduced matrix of a spinful lattice evaluated directly from
    /// the eigenvectors, without forming the density matrix.
    pub fn two_site_matrix(&self, spec: &ThermalSpec, site_a: usize, site_b: usize) -> Result<TwoSiteMatrix> {
        let basis = self.spectrum.basis();
        let sites = basis.modes() / 2;
        if site_a == site_b || site_a >= sites || site_b >= sites || basis.modes() % 2 != 0 {
            return Err(Error::InvalidPair(format!(
                "sites ({site_a},{site_b}) on a lattice of {sites} spinful sites"
            )));
        }
        let w = self.weights(spec)?;
        let mut m = CMatrix::zeros(16, 16);
        for &ra in &LocalState::ALL {
            for &rb in &LocalState::ALL {
                for &ca in &LocalState::ALL {
                    for &cb in &LocalState::ALL {
                        let s = two_site_entry_string(site_a, site_b, (ra, rb), (ca, cb));
                        m[(TwoSiteMatrix::index(ra, rb), TwoSiteMatrix::index(ca, cb))] =
                            self.spectrum.expect_factors(&w, &s);
                    }
                }
            }
        }
        Ok(TwoSiteMatrix { matrix: m })
    }
}

/// `exp(-H/T)/Z`, evaluated with the spectrum shifted by its minimum.
pub fn canonical_state(h: &Operator, temperature: f64) -> Result<DensityMatrix> {
    ThermalSolver::new(h)?.canonical(temperature)
}

/// `exp(-(H - mu N)/T)/Z` on a basis where `N` is diagonal.
pub fn grand_canonical_state(h: &Operator, number: &Operator, temperature: f64, mu: f64) -> Result<DensityMatrix> {
    ThermalSolver::with_number(h, number)?.grand_canonical(temperature, mu)
}

/// Levels closer than this are treated as degenerate in the band.
const LEVEL_TOL: f64 = 1e-9;

/// Fermi-Dirac occupations `1/(exp((E_k - mu)/T) + 1)` of the ring band.
/// At `T = 0` levels within `1e-9` of `mu` are half filled.
pub fn fermi_occupations(m: usize, t: f64, temperature: f64, mu: f64) -> Vec<f64> {
    band_energies(m, t)
        .into_iter()
        .map(|e| fermi(e, temperature, mu))
        .collect()
}

fn fermi(e: f64, temperature: f64, mu: f64) -> f64 {
    if temperature == 0.0 {
        if (e - mu).abs() <= LEVEL_TOL {
            0.5
        } else if e < mu {
            1.0
        } else {
            0.0
        }
    } else {
        let x = (e - mu) / temperature;
        // stable form for either sign of x
        if x > 0.0 {
            let y = (-x).exp();
            y / (1.0 + y)
        } else {
            1.0 / (1.0 + x.exp())
        }
    }
}

/// Chemical potential for a target filling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FillingSolution {
    pub mu: f64,
    /// Filling actually produced by `mu` through [`fermi_occupations`].
    pub achieved: f64,
    /// Whether `achieved` equals the target within `1e-9`.
    pub exact: bool,
}

/// Degenerate multiplets of the band, ascending: (energy, member k's).
fn multiplets(m: usize, t: f64) -> Vec<(f64, Vec<usize>)> {
    let e = band_energies(m, t);
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| e[a].total_cmp(&e[b]));
    let mut out: Vec<(f64, Vec<usize>)> = Vec::new();
    for k in order {
        match out.last_mut() {
            Some((e0, ks)) if (e[k] - *e0).abs() <= LEVEL_TOL => ks.push(k),
            _ => out.push((e[k], vec![k])),
        }
    }
    out
}

fn check_filling(target: f64) -> Result<()> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "filling must lie in (0, 1), got {target}"
        )));
    }
    Ok(())
}

/// Chemical potential giving mean occupation `target` per spin-orbital.
///
/// For `T > 0` this is a bisection on `[-2t - 10T, 2t + 10T]`. At `T = 0` a
/// target that closes a shell returns the midpoint of the gap above it; a
/// target inside a degenerate multiplet returns the multiplet energy, where
/// the multiplet is half filled, and `exact` reports whether that matches.
pub fn chemical_potential_for_filling(m: usize, t: f64, temperature: f64, target: f64) -> Result<FillingSolution> {
    check_filling(target)?;
    if temperature < 0.0 || !temperature.is_finite() {
        return Err(Error::InvalidParameter(format!("invalid temperature {temperature}")));
    }
    let filling = |mu: f64| fermi_occupations(m, t, temperature, mu).iter().sum::<f64>() / m as f64;
    if temperature == 0.0 {
        let x = target * m as f64;
        let levels = multiplets(m, t);
        let mut below = 0usize;
        for (i, (e, ks)) in levels.iter().enumerate() {
            let above = below + ks.len();
            if (x - above as f64).abs() <= LEVEL_TOL * m as f64 {
                let next = levels.get(i + 1).map(|l| l.0).unwrap_or(e + 1.0);
                let mu = 0.5 * (e + next);
                return Ok(FillingSolution {
                    mu,
                    achieved: filling(mu),
                    exact: true,
                });
            }
            if x < above as f64 {
                let achieved = filling(*e);
                return Ok(FillingSolution {
                    mu: *e,
                    achieved,
                    exact: (achieved - target).abs() < 1e-9,
                });
            }
            below = above;
        }
        unreachable!("target below one is inside the band");
    }
    let (mut lo, mut hi) = (-2.0 * t.abs() - 10.0 * temperature, 2.0 * t.abs() + 10.0 * temperature);
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let f = filling(mid);
        if (f - target).abs() < 1e-9 * 1e-3 {
            break;
        }
        if f < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let achieved = filling(mid);
    Ok(FillingSolution {
        mu: mid,
        achieved,
        exact: (achieved - target).abs() < 1e-9,
    })
}

/// Band occupations with mean exactly `target`. At `T > 0` these are the
/// Fermi occupations at the bisected `mu`. At `T = 0` they are the
/// zero-temperature limit at fixed filling: lower multiplets full, the
/// partially occupied multiplet filled uniformly to the remaining fraction.
pub fn occupations_for_filling(m: usize, t: f64, temperature: f64, target: f64) -> Result<Vec<f64>> {
    check_filling(target)?;
    if temperature > 0.0 {
        let sol = chemical_potential_for_filling(m, t, temperature, target)?;
        return Ok(fermi_occupations(m, t, temperature, sol.mu));
    }
    let mut x = target * m as f64;
    if (x - x.round()).abs() <= LEVEL_TOL {
        x = x.round();
    }
    let mut n = vec![0.0; m];
    let mut below = 0.0;
    for (_, ks) in multiplets(m, t) {
        let d = ks.len() as f64;
        let fill = ((x - below) / d).clamp(0.0, 1.0);
        for k in ks {
            n[k] = fill;
        }
        below += d;
    }
    Ok(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{enumerate_basis, ParticleKind, Term};
    use crate::linalg::max_abs_diff;
    use crate::models::{bose_hubbard_ring, spinful_fermion_lattice, spinless_fermion_ring};

    #[test]
    fn degenerate_ring_ground_state() {
        let g = ground_state(&spinless_fermion_ring(4, 1.0, 2).unwrap()).unwrap();
        assert_eq!(g.degeneracy(), 2);
        assert!((g.energy + 2.0).abs() < 1e-12);
        let vals: Vec<f64> = g.mixture.eigenvalues().into_iter().filter(|v| *v > 1e-12).collect();
        assert_eq!(vals.len(), 2);
        let b = bose_hubbard_ring(4, 1.0, 1.0, 2).unwrap();
        let gb = ground_state(&b).unwrap();
        assert_eq!(gb.degeneracy(), 1);
        for v in &gb.eigenspace {
            let hv = b.apply(v).unwrap();
            assert!((hv.amplitudes() - v.amplitudes() * re(gb.energy)).norm() < 1e-10);
        }
    }

    #[test]
    fn lanczos_path_agrees_with_dense() {
        let h = spinless_fermion_ring(8, 1.0, 4).unwrap();
        let dense = ground_state(&h).unwrap();
        let small = SolverOptions {
            dense_limit: 10,
            ..SolverOptions::default()
        };
        let sparse = ground_state_with(&h, small).unwrap();
        assert!((dense.energy - sparse.energy).abs() < 1e-9);
        assert_eq!(dense.degeneracy(), sparse.degeneracy());
        assert!(matches!(Spectrum::compute(&h, small), Err(Error::BlockTooLarge { .. })));
    }

    #[test]
    fn canonical_limits() {
        let h = bose_hubbard_ring(4, 1.0, 1.0, 2).unwrap();
        let solver = ThermalSolver::new(&h).unwrap();
        let hot = solver.canonical(1e6).unwrap().to_dense();
        let id = CMatrix::identity(10, 10) / re(10.0);
        assert!(max_abs_diff(&hot, &id) < 1e-6);
        let cold = solver.canonical(0.0).unwrap();
        let g = ground_state(&h).unwrap();
        assert!(max_abs_diff(&cold.to_dense(), &g.mixture.to_dense()) < 1e-12);
        let warm = solver.canonical(0.7).unwrap();
        assert!((warm.weight() - 1.0).abs() < 1e-12);
        assert!(warm.commutator_defect(&h) < 1e-10);
    }

    #[test]
    fn two_level_population_ratio() {
        let b = Arc::new(enumerate_basis(ParticleKind::Fermion, 1, None).unwrap());
        let h = crate::fock::build_operator(&b, &[Term::number(0.8, 0)]).unwrap();
        let rho = canonical_state(&h, 0.3).unwrap();
        let filled = b.index_of(&[1]).unwrap();
        let empty = b.index_of(&[0]).unwrap();
        let ratio = rho.entry(filled, filled).re / rho.entry(empty, empty).re;
        assert!((ratio - (-0.8f64 / 0.3).exp()).abs() < 1e-12);
        let n = Operator::number(&b, 0).unwrap();
        let gc = grand_canonical_state(&h, &n, 0.3, 0.5).unwrap();
        assert!((gc.expectation(&n).re - fermi(0.8, 0.3, 0.5)).abs() < 1e-12);
        let vac = grand_canonical_state(&h, &n, 0.3, -200.0).unwrap();
        assert!((vac.entry(empty, empty).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lattice_hopping_matches_band_sum() {
        let (m, t, temp, mu) = (4, 1.0, 0.4, -0.3);
        let h = spinful_fermion_lattice(m, t, true).unwrap();
        let b = h.basis().clone();
        let solver = ThermalSolver::with_number(&h, &Operator::total_number(&b, None).unwrap()).unwrap();
        let rho = solver.grand_canonical(temp, mu).unwrap();
        assert!(rho.commutator_defect(&h) < 1e-10);
        let n = fermi_occupations(m, t, temp, mu);
        for d in 0..m {
            let op = crate::fock::build_operator(&b, &[Term::hopping(1.0, 0, 2 * d)]).unwrap();
            let got = rho.expectation(&op);
            // <c_0^dag c_d> = (1/M) sum_k e^{2 pi i (0 - d) k / M} n_k
            let expected: Complex64 = (0..m)
                .map(|k| Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * (d * k) as f64 / m as f64) * n[k])
                .sum::<Complex64>()
                / re(m as f64);
            assert!((got - expected).norm() < 1e-10, "d={d}");
        }
    }

    #[test]
    fn two_site_fast_path_matches_density_route() {
        let h = spinful_fermion_lattice(3, 1.0, true).unwrap();
        let b = h.basis().clone();
        let solver = ThermalSolver::with_number(&h, &Operator::total_number(&b, None).unwrap()).unwrap();
        for spec in [
            ThermalSpec::grand_canonical(0.5, 0.2),
            ThermalSpec::grand_canonical(0.0, -1.0),
        ] {
            let fast = solver.two_site_matrix(&spec, 0, 2).unwrap();
            let slow = crate::fock::reduce_two_site(&solver.state(&spec).unwrap(), 0, 2).unwrap();
            assert!(max_abs_diff(&fast.matrix, &slow.matrix) < 1e-12);
        }
    }

    #[test]
    fn occupations_behave() {
        for temp in [0.0, 0.3, 2.0] {
            let n = fermi_occupations(30, 1.0, temp, 0.0);
            assert!((n.iter().sum::<f64>() / 30.0 - 0.5).abs() < 1e-12);
        }
        assert!(fermi_occupations(30, 1.0, 0.0, 2.5).iter().all(|&x| x == 1.0));
        let mut last = 0.0;
        for i in 0..50 {
            let s: f64 = fermi_occupations(12, 1.0, 0.2, -3.0 + 0.12 * i as f64).iter().sum();
            assert!(s > last);
            last = s;
        }
    }

    #[test]
    fn zero_temperature_filling() {
        let half = chemical_potential_for_filling(30, 1.0, 0.0, 0.5).unwrap();
        assert!(half.mu.abs() < 1e-12);
        // three lowest levels: closed shell, gap midpoint
        let s = chemical_potential_for_filling(30, 1.0, 0.0, 0.1).unwrap();
        let e1 = -2.0 * (2.0 * std::f64::consts::PI / 30.0).cos();
        let e2 = -2.0 * (4.0 * std::f64::consts::PI / 30.0).cos();
        assert!((s.mu - 0.5 * (e1 + e2)).abs() < 1e-12 && s.exact);
        // filling 0.2 reached with the k = +-3 pair half filled
        let s = chemical_potential_for_filling(30, 1.0, 0.0, 0.2).unwrap();
        let occupied = fermi_occupations(30, 1.0, 0.0, s.mu)
            .iter()
            .filter(|&&x| x > 0.0)
            .count();
        assert_eq!(occupied, 7);
        assert!(s.exact);
        let n = occupations_for_filling(30, 1.0, 0.0, 0.45).unwrap();
        assert!((n.iter().sum::<f64>() / 30.0 - 0.45).abs() < 1e-12);
        let t = chemical_potential_for_filling(30, 1.0, 0.3, 0.2).unwrap();
        assert!((t.achieved - 0.2).abs() < 1e-9);
        assert!(chemical_potential_for_filling(30, 1.0, 0.0, 1.0).is_err());
    }
}
