use std::sync::Arc;

use num_complex::Complex64;

use super::basis::{FockBasis, ParticleKind};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{re, CMatrix, SparseMatrix};

/// A single creation or annihilation operator on a mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ladder {
    Create(usize),
    Annihilate(usize),
}

impl Ladder {
    pub fn mode(self) -> usize {
        match self {
            Ladder::Create(m) | Ladder::Annihilate(m) => m,
        }
    }

    pub fn adjoint(self) -> Self {
        match self {
            Ladder::Create(m) => Ladder::Annihilate(m),
            Ladder::Annihilate(m) => Ladder::Create(m),
        }
    }
}

/// Factor of an operator string as applied to occupation vectors.
/// `Empty(m)` is the projector `1 - n_m` for fermions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Factor {
    Create(usize),
    Annihilate(usize),
    Empty(usize),
}

impl From<Ladder> for Factor {
    fn from(l: Ladder) -> Self {
        match l {
            Ladder::Create(m) => Factor::Create(m),
            Ladder::Annihilate(m) => Factor::Annihilate(m),
        }
    }
}

/// `coefficient * l_1 l_2 ... l_k`, written left to right; the rightmost
/// factor acts first.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coefficient: Complex64,
    pub ladders: Vec<Ladder>,
}

impl Term {
    pub fn new(coefficient: Complex64, ladders: Vec<Ladder>) -> Self {
        Self { coefficient, ladders }
    }

    pub fn real(coefficient: f64, ladders: Vec<Ladder>) -> Self {
        Self::new(re(coefficient), ladders)
    }

    /// `coefficient * a_i^dagger a_j`.
    pub fn hopping(coefficient: f64, to: usize, from: usize) -> Self {
        Self::real(coefficient, vec![Ladder::Create(to), Ladder::Annihilate(from)])
    }

    /// `coefficient * n_m`.
    pub fn number(coefficient: f64, mode: usize) -> Self {
        Self::hopping(coefficient, mode, mode)
    }

    /// `coefficient * n_i n_j` in normal order (`a_i^dagger a_j^dagger a_j a_i`).
    /// For `i == j` this is `n (n - 1)`.
    pub fn density_density(coefficient: f64, i: usize, j: usize) -> Self {
        Self::real(
            coefficient,
            vec![
                Ladder::Create(i),
                Ladder::Create(j),
                Ladder::Annihilate(j),
                Ladder::Annihilate(i),
            ],
        )
    }

    /// Net change of particle number.
    pub fn charge(&self) -> i64 {
        self.ladders
            .iter()
            .map(|l| match l {
                Ladder::Create(_) => 1,
                Ladder::Annihilate(_) => -1,
            })
            .sum()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            coefficient: self.coefficient.conj(),
            ladders: self.ladders.iter().rev().map(|l| l.adjoint()).collect(),
        }
    }
}

/// Applies an operator string to an occupation vector in place. Returns the
/// amplitude, or `None` when the state is annihilated.
///
/// Fermionic signs follow the Jordan-Wigner convention with the canonical
/// mode order: `c_m^dagger |n> = (-1)^(sum_{l<m} n_l) |n + e_m>`.
pub(crate) fn apply_factors(kind: ParticleKind, occ: &mut [u32], factors: &[Factor]) -> Option<f64> {
    let mut amp = 1.0;
    // bosonic sqrt factors are collected and rooted once, so n and n(n-1) stay exact
    let mut radicand = 1.0f64;
    for f in factors.iter().rev() {
        match (*f, kind) {
            (Factor::Create(m), ParticleKind::Boson) => {
                occ[m] += 1;
                radicand *= occ[m] as f64;
            }
            (Factor::Annihilate(m), ParticleKind::Boson) => {
                if occ[m] == 0 {
                    return None;
                }
                radicand *= occ[m] as f64;
                occ[m] -= 1;
            }
            (Factor::Empty(m), _) => {
                if occ[m] != 0 {
                    return None;
                }
            }
            (Factor::Create(m), ParticleKind::Fermion) => {
                if occ[m] == 1 {
                    return None;
                }
                if jw_parity(occ, m) {
                    amp = -amp;
                }
                occ[m] = 1;
            }
            (Factor::Annihilate(m), ParticleKind::Fermion) => {
                if occ[m] == 0 {
                    return None;
                }
                if jw_parity(occ, m) {
                    amp = -amp;
                }
                occ[m] = 0;
            }
        }
    }
    Some(amp * radicand.sqrt())
}

#[inline]
fn jw_parity(occ: &[u32], mode: usize) -> bool {
    occ[..mode].iter().filter(|&&n| n == 1).count() % 2 == 1
}

/// Sparse matrix representation of a second-quantized operator on a basis.
#[derive(Debug, Clone)]
pub struct Operator {
    basis: Arc<FockBasis>,
    matrix: SparseMatrix,
}

/// Builds the matrix of `sum_k coefficient_k * string_k` on `basis`.
///
/// On a fixed-N basis every term must conserve particle number. On a
/// truncated bosonic basis, amplitude leaving the truncation is dropped.
pub fn build_operator(basis: &Arc<FockBasis>, terms: &[Term]) -> Result<Operator> {
    for term in terms {
        for l in &term.ladders {
            basis.check_mode(l.mode())?;
        }
        if basis.total().is_some() && term.charge() != 0 {
            return Err(Error::SectorViolation(format!(
                "term {:?} changes the particle number by {} on a fixed-N basis",
                term.ladders,
                term.charge()
            )));
        }
    }
    let factor_lists: Vec<(Complex64, Vec<Factor>)> = terms
        .iter()
        .map(|t| (t.coefficient, t.ladders.iter().map(|&l| l.into()).collect()))
        .collect();
    let mut triplets = Vec::new();
    let mut scratch = vec![0u32; basis.modes()];
    for (col, state) in basis.states().iter().enumerate() {
        for (coefficient, factors) in &factor_lists {
            scratch.copy_from_slice(state.occupations());
            if let Some(amp) = apply_factors(basis.kind(), &mut scratch, factors) {
                let total: usize = scratch.iter().map(|&n| n as usize).sum();
                if !basis.admits_total(total) {
                    continue;
                }
                let row = basis
                    .index_of(&scratch)
                    .expect("states admitted by the sector are enumerated");
                triplets.push((row, col, coefficient * amp));
            }
        }
    }
    Ok(Operator {
        basis: Arc::clone(basis),
        matrix: SparseMatrix::from_triplets(basis.dim(), basis.dim(), triplets),
    })
}

impl Operator {
    pub fn from_sparse(basis: &Arc<FockBasis>, matrix: SparseMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            basis: Arc::clone(basis),
            matrix,
        })
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Self {
        Self {
            basis: Arc::clone(basis),
            matrix: SparseMatrix::identity(basis.dim()),
        }
    }

    /// `n_m` for a single mode.
    pub fn number(basis: &Arc<FockBasis>, mode: usize) -> Result<Self> {
        build_operator(basis, &[Term::number(1.0, mode)])
    }

    /// Total particle number over the listed modes (all modes if `None`).
    pub fn total_number(basis: &Arc<FockBasis>, modes: Option<&[usize]>) -> Result<Self> {
        let all: Vec<usize> = (0..basis.modes()).collect();
        let modes = modes.unwrap_or(&all);
        let terms: Vec<Term> = modes.iter().map(|&m| Term::number(1.0, m)).collect();
        build_operator(basis, &terms)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn sparse(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn to_dense(&self) -> CMatrix {
        self.matrix.to_dense()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.matrix.get(row, col)
    }

    pub fn adjoint(&self) -> Self {
        self.with_matrix(self.matrix.adjoint())
    }

    pub fn scale(&self, s: f64) -> Self {
        self.with_matrix(self.matrix.scale(re(s)))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(self.with_matrix(self.matrix.add(&other.matrix)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(self.with_matrix(self.matrix.sub(&other.matrix)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same_basis(other)?;
        Ok(self.with_matrix(self.matrix.matmul(&other.matrix)))
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.sub(&other.mul(self)?)
    }

    /// `{self, other}`.
    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.mul(other)?.add(&other.mul(self)?)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.matrix.max_abs()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.matrix.sub(&self.matrix.adjoint()).max_abs()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.check_basis(psi.basis())?;
        StateVector::new(&self.basis, self.matrix.apply(psi.amplitudes()))
    }

    /// `<psi| O |psi>` (no normalization applied).
    pub fn expectation(&self, psi: &StateVector) -> Result<Complex64> {
        self.check_basis(psi.basis())?;
        Ok(psi.amplitudes().dotc(&self.matrix.apply(psi.amplitudes())))
    }

    /// Matrix conjugated by a basis permutation: entry `(perm[i], perm[j])`
    /// of the result equals entry `(i, j)` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        self.with_matrix(SparseMatrix::from_triplets(
            self.dim(),
            self.dim(),
            self.matrix.triplets().map(|(r, c, v)| (perm[r], perm[c], v)),
        ))
    }

    fn with_matrix(&self, matrix: SparseMatrix) -> Self {
        Self {
            basis: Arc::clone(&self.basis),
            matrix,
        }
    }

    fn check_same_basis(&self, other: &Self) -> Result<()> {
        self.check_basis(&other.basis)
    }

    fn check_basis(&self, basis: &Arc<FockBasis>) -> Result<()> {
        if Arc::ptr_eq(&self.basis, basis) || *self.basis == **basis {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                found: basis.dim(),
            })
        }
    }
}

/// Expands every ladder operator of `terms` through the single-particle
/// transformation `a_j = sum_k w[(j, k)] b_k`, so that operators written in
/// the old modes can be built in the new ones. Creation operators pick up the
/// complex conjugate coefficients.
pub fn transform_terms(terms: &[Term], w: &CMatrix) -> Vec<Term> {
    let mut out = Vec::new();
    for term in terms {
        let mut partial: Vec<(Complex64, Vec<Ladder>)> = vec![(term.coefficient, Vec::new())];
        for l in &term.ladders {
            let row = l.mode();
            let mut next = Vec::new();
            for (coef, ladders) in &partial {
                for k in 0..w.ncols() {
                    let wk = w[(row, k)];
                    if wk.norm() < 1e-15 {
                        continue;
                    }
                    let (factor, new) = match l {
                        Ladder::Create(_) => (wk.conj(), Ladder::Create(k)),
                        Ladder::Annihilate(_) => (wk, Ladder::Annihilate(k)),
                    };
                    let mut ladders = ladders.clone();
                    ladders.push(new);
                    next.push((coef * factor, ladders));
                }
            }
            partial = next;
        }
        out.extend(partial.into_iter().map(|(c, l)| Term::new(c, l)));
    }
    out
}
