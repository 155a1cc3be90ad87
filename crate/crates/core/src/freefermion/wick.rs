//! Expectation values of ladder strings in number-conserving fermionic
//! Gaussian states, via Wick's theorem written as a Pfaffian.

use num_complex::Complex64;

use crate::fock::operator::Factor;
use crate::linalg::{CMatrix, ONE, ZERO};

/// Pfaffian of a skew-symmetric matrix (Parlett-Reid tridiagonalization
/// with partial pivoting).
pub fn pfaffian(a: &CMatrix) -> Complex64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return ZERO;
    }
    let mut a = a.clone();
    let mut pf = ONE;
    let mut k = 0;
    while k + 1 < n {
        let (mut kp, mut best) = (k + 1, a[(k + 1, k)].norm());
        for i in k + 2..n {
            if a[(i, k)].norm() > best {
                best = a[(i, k)].norm();
                kp = i;
            }
        }
        if kp != k + 1 {
            a.swap_rows(k + 1, kp);
            a.swap_columns(k + 1, kp);
            pf = -pf;
        }
        let pivot = a[(k, k + 1)];
        if pivot == ZERO {
            return ZERO;
        }
        pf *= pivot;
        if k + 2 < n {
            let tau: Vec<Complex64> = (k + 2..n).map(|j| a[(k, j)] / pivot).collect();
            let col: Vec<Complex64> = (k + 2..n).map(|i| a[(i, k + 1)]).collect();
            for (ii, i) in (k + 2..n).enumerate() {
                for (jj, j) in (k + 2..n).enumerate() {
                    a[(i, j)] += tau[ii] * col[jj] - col[ii] * tau[jj];
                }
            }
        }
        k += 2;
    }
    pf
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Create(usize),
    Annihilate(usize),
}

/// Gaussian state fixed by its one-body matrix `g[(i, j)] = <c_i^dag c_j>`.
#[derive(Debug, Clone)]
pub struct GaussianState {
    g: CMatrix,
}

impl GaussianState {
    pub fn new(g: CMatrix) -> Self {
        Self { g }
    }

    pub fn correlation_matrix(&self) -> &CMatrix {
        &self.g
    }

    fn contract(&self, left: Op, right: Op) -> Complex64 {
        match (left, right) {
            (Op::Create(i), Op::Annihilate(j)) => self.g[(i, j)],
            (Op::Annihilate(i), Op::Create(j)) => {
                let delta = if i == j { ONE } else { ZERO };
                delta - self.g[(j, i)]
            }
            _ => ZERO,
        }
    }

    fn expect_ops(&self, ops: &[Op]) -> Complex64 {
        let n = ops.len();
        if n == 0 {
            return ONE;
        }
        if n % 2 == 1 {
            return ZERO;
        }
        let creates = ops.iter().filter(|o| matches!(o, Op::Create(_))).count();
        if 2 * creates != n {
            return ZERO;
        }
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = self.contract(ops[i], ops[j]);
                m[(i, j)] = v;
                m[(j, i)] = -v;
            }
        }
        pfaffian(&m)
    }

    /// `<S>` for an operator string whose projector factors `1 - n_m` are
    /// expanded before applying Wick's theorem.
    pub(crate) fn expect(&self, factors: &[Factor]) -> Complex64 {
        let mut expansions: Vec<(f64, Vec<Op>)> = vec![(1.0, Vec::new())];
        for f in factors {
            match *f {
                Factor::Create(m) => expansions.iter_mut().for_each(|e| e.1.push(Op::Create(m))),
                Factor::Annihilate(m) => expansions.iter_mut().for_each(|e| e.1.push(Op::Annihilate(m))),
                Factor::Empty(m) => {
                    let mut next = Vec::with_capacity(2 * expansions.len());
                    for (s, ops) in expansions {
                        let mut with_n = ops.clone();
                        with_n.push(Op::Create(m));
                        with_n.push(Op::Annihilate(m));
                        next.push((s, ops));
                        next.push((-s, with_n));
                    }
                    expansions = next;
                }
            }
        }
        expansions.iter().map(|(s, ops)| self.expect_ops(ops) * *s).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, re};

    #[test]
    fn pfaffian_small_cases() {
        let mut a = CMatrix::zeros(2, 2);
        a[(0, 1)] = c(0.3, 1.0);
        a[(1, 0)] = -a[(0, 1)];
        assert_eq!(pfaffian(&a), c(0.3, 1.0));
        // 4x4: a01 a23 - a02 a13 + a03 a12
        let v = [re(1.0), re(2.0), re(3.0), re(4.0), re(5.0), re(6.0)];
        let mut b = CMatrix::zeros(4, 4);
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for (x, &(i, j)) in pairs.iter().enumerate() {
            b[(i, j)] = v[x];
            b[(j, i)] = -v[x];
        }
        assert!((pfaffian(&b) - re(1.0 * 6.0 - 2.0 * 5.0 + 3.0 * 4.0)).norm() < 1e-12);
    }

    #[test]
    fn pfaffian_squared_is_determinant() {
        let n = 8;
        let mut a = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 - 1.0);
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        let pf = pfaffian(&a);
        assert!((pf * pf - a.determinant()).norm() < 1e-9 * a.determinant().norm().max(1.0));
    }

    #[test]
    fn two_body_wick_factorization() {
        let g = CMatrix::from_fn(2, 2, |i, j| if i == j { re(0.3) } else { c(0.1, 0.05) });
        let s = GaussianState::new(g.clone());
        // <c0^dag c1^dag c1 c0> = G00 G11 - G01 G10
        let got = s.expect(&[
            Factor::Create(0),
            Factor::Create(1),
            Factor::Annihilate(1),
            Factor::Annihilate(0),
        ]);
        let expected = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
        assert!((got - expected).norm() < 1e-14);
        // <1 - n_0> = 1 - G00
        assert!((s.expect(&[Factor::Empty(0)]) - re(0.7)).norm() < 1e-15);
    }
}
