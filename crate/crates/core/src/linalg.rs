//! Dense and sparse complex linear algebra shared by the rest of the crate.
//!
//! Dense Hermitian eigenproblems go through `nalgebra`; sparse operators are
//! stored in a small CSR type that only supports what the Fock-space code
//! needs (assembly from triplets, products, matrix-vector application).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted in
/// ascending order. Columns of the returned matrix are the eigenvectors.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // Symmetrize to remove round-off asymmetry before handing to the solver.
    let sym = (m + m.adjoint()) * re(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    hermitian_eigen(m).0
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let fv = re(f(v));
        scaled.column_mut(j).iter_mut().for_each(|x| *x *= fv);
    }
    scaled * vectors.adjoint()
}

/// Square root of a positive semi-definite matrix; negative round-off
/// eigenvalues are clipped to zero.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |x| x.max(0.0).sqrt())
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Largest entrywise absolute difference between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// `[a, b] = ab - ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Unitary from the exponential of `i` times a Hermitian generator.
pub fn unitary_from_generator(h: &CMatrix) -> CMatrix {
    let (values, vectors) = hermitian_eigen(h);
    let mut scaled = vectors.clone();
    for (j, &v) in values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, v);
        scaled.column_mut(j).iter_mut().for_each(|x| *x *= phase);
    }
    scaled * vectors.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Compressed-sparse-row complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<Complex64>,
}

impl SparseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_ptr: vec![0; nrows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, n, (0..n).map(|i| (i, i, ONE)))
    }

    /// Assembles a matrix from `(row, col, value)` triplets; duplicates are
    /// summed and exact zeros dropped. Column order within a row is sorted, so
    /// the result does not depend on triplet order up to floating-point
    /// summation order of duplicates.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Complex64)>,
    ) -> Self {
        let mut rows: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); nrows];
        for (r, col, v) in triplets {
            assert!(r < nrows && col < ncols, "triplet out of bounds");
            rows[r].push((col, v));
        }
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(col, _)| col);
            let mut iter = row.into_iter().peekable();
            while let Some((col, mut v)) = iter.next() {
                while let Some(&(next, w)) = iter.peek() {
                    if next != col {
                        break;
                    }
                    v += w;
                    iter.next();
                }
                if v != ZERO {
                    col_idx.push(col);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Non-zero entries of one row as `(col, value)`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| self.row(r).map(move |(col, v)| (r, col, v)))
    }

    pub fn get(&self, r: usize, col: usize) -> Complex64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&col) {
            Ok(pos) => self.values[span.start + pos],
            Err(_) => ZERO,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for (r, col, v) in self.triplets() {
            m[(r, col)] = v;
        }
        m
    }

    pub fn from_dense(m: &CMatrix) -> Self {
        let (nrows, ncols) = m.shape();
        Self::from_triplets(
            nrows,
            ncols,
            (0..nrows).flat_map(|r| (0..ncols).map(move |col| (r, col, m[(r, col)]))),
        )
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, col, v)| (col, r, v.conj())),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().map(|(r, col, v)| (r, col, v * s)),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(self.nrows, self.ncols, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(re(-1.0)))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows);
        let mut triplets = Vec::new();
        for r in 0..self.nrows {
            for (k, a) in self.row(r) {
                for (col, b) in other.row(k) {
                    triplets.push((r, col, a * b));
                }
            }
        }
        Self::from_triplets(self.nrows, other.ncols, triplets)
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        assert_eq!(x.len(), self.ncols);
        CVector::from_iterator(
            self.nrows,
            (0..self.nrows).map(|r| self.row(r).map(|(col, v)| v * x[col]).sum()),
        )
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Dense sub-matrix on the given (row and column) index set.
    pub fn principal_submatrix(&self, indices: &[usize], position: &[Option<usize>]) -> CMatrix {
        let n = indices.len();
        let mut m = CMatrix::zeros(n, n);
        for (local, &global) in indices.iter().enumerate() {
            for (col, v) in self.row(global) {
                if let Some(lc) = position[col] {
                    m[(local, lc)] = v;
                }
            }
        }
        m
    }
}

/// Result of a Lanczos run: lowest Ritz value and its normalized vector.
#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub value: f64,
    pub vector: CVector,
    pub residual: f64,
}

/// Lowest eigenpair of a Hermitian sparse matrix restricted to the orthogonal
/// complement of `deflate` (which must be orthonormal). Uses restarted
/// Lanczos with full reorthogonalization.
pub fn lanczos_lowest(h: &SparseMatrix, deflate: &[CVector], tol: f64, seed: u64) -> LanczosResult {
    let n = h.nrows();
    let project_out = |v: &mut CVector| {
        for d in deflate {
            let overlap = d.dotc(v);
            v.axpy(-overlap, d, ONE);
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut start = CVector::from_iterator(
        n,
        (0..n).map(|_| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)),
    );
    project_out(&mut start);
    let krylov_max = n.saturating_sub(deflate.len()).clamp(1, 120);
    let mut best = LanczosResult {
        value: f64::INFINITY,
        vector: start.clone(),
        residual: f64::INFINITY,
    };
    for _restart in 0..200 {
        let norm = start.norm();
        if norm == 0.0 {
            break;
        }
        let mut basis: Vec<CVector> = vec![start.unscale(norm)];
        let mut alpha: Vec<f64> = Vec::new();
        let mut beta: Vec<f64> = Vec::new();
        for j in 0..krylov_max {
            let mut w = h.apply(&basis[j]);
            project_out(&mut w);
            let a = basis[j].dotc(&w).re;
            alpha.push(a);
            // full reorthogonalization, twice for stability
            for _ in 0..2 {
                for b in &basis {
                    let overlap = b.dotc(&w);
                    w.axpy(-overlap, b, ONE);
                }
                project_out(&mut w);
            }
            let bnorm = w.norm();
            if j + 1 == krylov_max || bnorm < 1e-12 {
                break;
            }
            beta.push(bnorm);
            basis.push(w.unscale(bnorm));
        }
        let m = alpha.len();
        let mut t = CMatrix::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = re(alpha[i]);
            if i + 1 < m {
                t[(i, i + 1)] = re(beta[i]);
                t[(i + 1, i)] = re(beta[i]);
            }
        }
        let (values, vectors) = hermitian_eigen(&t);
        let mut ritz = CVector::zeros(n);
        for (i, b) in basis.iter().take(m).enumerate() {
            ritz.axpy(vectors[(i, 0)], b, ONE);
        }
        let rn = ritz.norm();
        ritz.unscale_mut(rn);
        let mut residual_vec = h.apply(&ritz);
        project_out(&mut residual_vec);
        residual_vec.axpy(re(-values[0]), &ritz, ONE);
        let residual = residual_vec.norm();
        best = LanczosResult {
            value: values[0],
            vector: ritz.clone(),
            residual,
        };
        if residual < tol || m < krylov_max {
            break;
        }
        start = ritz;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            3,
            3,
            &[
                re(2.0),
                c(0.0, 1.0),
                ZERO,
                c(0.0, -1.0),
                re(2.0),
                ZERO,
                ZERO,
                ZERO,
                re(-1.0),
            ],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!((vals[0] + 1.0).abs() < 1e-12);
        assert!((vals[1] - 1.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(3, vals.iter().map(|&v| re(v))));
        let back = &vecs * diag * vecs.adjoint();
        assert!(max_abs_diff(&back, &m) < 1e-12);
    }

    #[test]
    fn sparse_roundtrip_and_product() {
        let a = CMatrix::from_fn(4, 4, |i, j| if (i + j) % 3 == 0 { c(i as f64, j as f64) } else { ZERO });
        let b = CMatrix::from_fn(
            4,
            4,
            |i, j| if i == j || i + 1 == j { re(1.0 + i as f64) } else { ZERO },
        );
        let sa = SparseMatrix::from_dense(&a);
        let sb = SparseMatrix::from_dense(&b);
        assert_eq!(sa.to_dense(), a);
        assert!(max_abs_diff(&sa.matmul(&sb).to_dense(), &(&a * &b)) < 1e-14);
        assert!(max_abs_diff(&sa.adjoint().to_dense(), &a.adjoint()) < 1e-14);
        let x = CVector::from_iterator(4, (0..4).map(|i| c(1.0, i as f64)));
        assert!((sa.apply(&x) - &a * &x).norm() < 1e-14);
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, re(1.0)), (0, 1, re(2.0)), (1, 0, re(1.0)), (1, 0, re(-1.0))],
        );
        assert_eq!(m.get(0, 1), re(3.0));
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn lanczos_finds_lowest_and_deflates() {
        // path graph Laplacian-like tridiagonal with known spectrum 2 - 2cos(k pi/(n+1))
        let n = 50;
        let h = SparseMatrix::from_triplets(
            n,
            n,
            (0..n).flat_map(|i| {
                let mut v = vec![(i, i, re(2.0))];
                if i + 1 < n {
                    v.push((i, i + 1, re(-1.0)));
                    v.push((i + 1, i, re(-1.0)));
                }
                v
            }),
        );
        let exact = |k: usize| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let first = lanczos_lowest(&h, &[], 1e-10, 1);
        assert!((first.value - exact(1)).abs() < 1e-9);
        let second = lanczos_lowest(&h, &[first.vector.clone()], 1e-10, 2);
        assert!((second.value - exact(2)).abs() < 1e-9);
    }
}
