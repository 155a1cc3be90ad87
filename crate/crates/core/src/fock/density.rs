use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_complex::Complex64;

use super::basis::{FockBasis, ParticleKind, Sector};
use super::operator::{apply_factors, Factor, Operator};
use super::state::StateVector;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, max_abs_diff, re, CMatrix, SparseMatrix, ZERO};

/// One diagonal block of a block-diagonal density matrix.
#[derive(Debug, Clone)]
pub struct DensityBlock {
    /// Basis indices spanned by the block, ascending.
    pub indices: Vec<usize>,
    pub matrix: CMatrix,
}

/// Density matrix over a Fock basis, stored block-diagonally. Entries
/// outside the blocks are zero. The trace is not forced to one, so projected
/// (sub-normalized) states use the same type; [`DensityMatrix::weight`]
/// reports the trace.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    basis: Arc<FockBasis>,
    blocks: Vec<DensityBlock>,
    locator: Vec<Option<(usize, usize)>>,
}

impl DensityMatrix {
    /// Assembles a density matrix from blocks over disjoint index sets.
    pub fn from_blocks(basis: &Arc<FockBasis>, blocks: Vec<(Vec<usize>, CMatrix)>) -> Result<Self> {
        let mut locator = vec![None; basis.dim()];
        let mut out = Vec::with_capacity(blocks.len());
        for (b, (indices, matrix)) in blocks.into_iter().enumerate() {
            if matrix.nrows() != indices.len() || matrix.ncols() != indices.len() {
                return Err(Error::DimensionMismatch {
                    expected: indices.len(),
                    found: matrix.nrows(),
                });
            }
            // keep indices ascending inside each block
            let mut order: Vec<usize> = (0..indices.len()).collect();
            order.sort_by_key(|&k| indices[k]);
            let sorted: Vec<usize> = order.iter().map(|&k| indices[k]).collect();
            let matrix = CMatrix::from_fn(sorted.len(), sorted.len(), |r, c| matrix[(order[r], order[c])]);
            for (local, &i) in sorted.iter().enumerate() {
                if i >= basis.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: basis.dim(),
                        found: i + 1,
                    });
                }
                if locator[i].is_some() {
                    return Err(Error::InvalidParameter(format!(
                        "basis index {i} appears in two density blocks"
                    )));
                }
                locator[i] = Some((b, local));
            }
            out.push(DensityBlock {
                indices: sorted,
                matrix,
            });
        }
        Ok(Self {
            basis: Arc::clone(basis),
            blocks: out,
            locator,
        })
    }

    /// Single dense block over the whole basis.
    pub fn from_dense(basis: &Arc<FockBasis>, matrix: CMatrix) -> Result<Self> {
        Self::from_blocks(basis, vec![((0..basis.dim()).collect(), matrix)])
    }

    /// `|psi><psi|`, stored on the support of `psi`.
    pub fn from_pure(psi: &StateVector) -> Self {
        Self::from_ensemble(psi.basis(), &[(1.0, psi)]).expect("same basis")
    }

    /// `sum_k p_k |psi_k><psi_k|` on the union of the supports.
    pub fn from_ensemble(basis: &Arc<FockBasis>, ensemble: &[(f64, &StateVector)]) -> Result<Self> {
        let mut support = BTreeSet::new();
        for (_, psi) in ensemble {
            if psi.basis().dim() != basis.dim() {
                return Err(Error::DimensionMismatch {
                    expected: basis.dim(),
                    found: psi.basis().dim(),
                });
            }
            for (i, a) in psi.amplitudes().iter().enumerate() {
                if *a != ZERO {
                    support.insert(i);
                }
            }
        }
        let indices: Vec<usize> = support.into_iter().collect();
        let mut m = CMatrix::zeros(indices.len(), indices.len());
        for (p, psi) in ensemble {
            let amps = psi.amplitudes();
            for (r, &i) in indices.iter().enumerate() {
                let ai = amps[i] * re(*p);
                if ai == ZERO {
                    continue;
                }
                for (c, &j) in indices.iter().enumerate() {
                    m[(r, c)] += ai * amps[j].conj();
                }
            }
        }
        Self::from_blocks(basis, vec![(indices, m)])
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn blocks(&self) -> &[DensityBlock] {
        &self.blocks
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        match (self.locator[i], self.locator[j]) {
            (Some((bi, li)), Some((bj, lj))) if bi == bj => self.blocks[bi].matrix[(li, lj)],
            _ => ZERO,
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.basis.dim(), self.basis.dim());
        for b in &self.blocks {
            for (r, &i) in b.indices.iter().enumerate() {
                for (c, &j) in b.indices.iter().enumerate() {
                    m[(i, j)] = b.matrix[(r, c)];
                }
            }
        }
        m
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        let n = self.basis.dim();
        SparseMatrix::from_triplets(
            n,
            n,
            self.blocks.iter().flat_map(|b| {
                b.indices.iter().enumerate().flat_map(move |(r, &i)| {
                    b.indices
                        .iter()
                        .enumerate()
                        .map(move |(c, &j)| (i, j, b.matrix[(r, c)]))
                })
            }),
        )
    }

    /// Trace of the (possibly sub-normalized) matrix.
    pub fn weight(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.matrix.diagonal().iter().map(|z| z.re).sum::<f64>())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for b in &mut out.blocks {
            b.matrix *= re(s);
        }
        out
    }

    /// Trace-one copy; errors on a zero-weight matrix.
    pub fn normalized(&self) -> Result<Self> {
        let w = self.weight();
        if w <= 0.0 {
            return Err(Error::Domain("cannot normalize a zero-weight state".into()));
        }
        Ok(self.scaled(1.0 / w))
    }

    /// Eigenvalues of the populated blocks, ascending. Zero eigenvalues of
    /// the unpopulated complement are not listed.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| hermitian_eigenvalues(&b.matrix))
            .collect();
        vals.sort_by(f64::total_cmp);
        vals
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| max_abs_diff(&b.matrix, &b.matrix.adjoint()))
            .fold(0.0, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()
            .first()
            .copied()
            .unwrap_or(0.0)
            .min(if self.locator.iter().any(|l| l.is_none()) {
                0.0
            } else {
                f64::INFINITY
            })
    }

    /// Checks Hermiticity (1e-12) and positivity (-1e-10).
    pub fn validate(&self) -> Result<()> {
        let h = self.hermiticity_defect();
        if h > 1e-12 {
            return Err(Error::NotHermitian(h));
        }
        let min = self.min_eigenvalue();
        if min < -1e-10 {
            return Err(Error::Domain(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// `Tr(rho O)`.
    pub fn expectation(&self, op: &Operator) -> Complex64 {
        let h = op.sparse();
        let mut acc = ZERO;
        for b in &self.blocks {
            for (r, &i) in b.indices.iter().enumerate() {
                // (rho O)_{ii} = sum_k rho_{ik} O_{ki}; O_{ki} is column i of O,
                // i.e. row i of O^T. Walk rho's row and look up O entries.
                for (c, &k) in b.indices.iter().enumerate() {
                    let rho = b.matrix[(r, c)];
                    if rho == ZERO {
                        continue;
                    }
                    let o = h.get(k, i);
                    if o != ZERO {
                        acc += rho * o;
                    }
                }
            }
        }
        acc
    }

    /// `Tr(rho S)` for an operator string `S` that maps basis states to
    /// single basis states.
    pub(crate) fn expect_factors(&self, factors: &[Factor]) -> Complex64 {
        let mut acc = ZERO;
        let mut scratch = vec![0u32; self.basis.modes()];
        for b in &self.blocks {
            for (c, &a) in b.indices.iter().enumerate() {
                scratch.copy_from_slice(self.basis.state(a).occupations());
                if let Some(amp) = apply_factors(self.basis.kind(), &mut scratch, factors) {
                    // S|a> = amp |j>, so Tr(rho S) picks rho_{a j} * amp.
                    if let Some(j) = self.basis.index_of(&scratch) {
                        if let Some((bj, lj)) = self.locator[j] {
                            if std::ptr::eq(&self.blocks[bj], b) {
                                acc += b.matrix[(c, lj)] * amp;
                            }
                        }
                    }
                }
            }
        }
        acc
    }

    /// Largest entry of `[rho, O]`.
    pub fn commutator_defect(&self, op: &Operator) -> f64 {
        let rho = self.to_sparse();
        let h = op.sparse();
        rho.matmul(h).sub(&h.matmul(&rho)).max_abs()
    }

    /// Reduced state on the listed modes (in the given order), tracing out
    /// the rest. Fermionic amplitudes are first reordered so the kept modes
    /// precede the traced ones; the reduced basis numbers kept modes by their
    /// position in `keep`.
    pub fn reduce_to_modes(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let modes = self.basis.modes();
        let mut seen = vec![false; modes];
        for &m in keep {
            self.basis.check_mode(m)?;
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPartition(format!("mode {m} listed twice")));
            }
        }
        if keep.is_empty() {
            return Err(Error::InvalidPartition("no modes to keep".into()));
        }
        let env: Vec<usize> = (0..modes).filter(|m| !seen[*m]).collect();
        let sector = match (self.basis.kind(), self.basis.sector()) {
            (ParticleKind::Fermion, _) => Sector::Full,
            (ParticleKind::Boson, Sector::Fixed(n)) | (ParticleKind::Boson, Sector::Truncated(n)) => {
                Sector::Truncated(n)
            }
            (ParticleKind::Boson, Sector::Full) => unreachable!("bosonic bases are never full"),
        };
        let reduced = Arc::new(FockBasis::new(self.basis.kind(), keep.len(), sector)?);
        let order: Vec<usize> = keep.iter().chain(env.iter()).copied().collect();
        let mut acc = CMatrix::zeros(reduced.dim(), reduced.dim());
        for b in &self.blocks {
            // group block members by environment pattern
            let mut groups: BTreeMap<Vec<u32>, Vec<(usize, usize, f64)>> = BTreeMap::new();
            for (local, &i) in b.indices.iter().enumerate() {
                let occ = self.basis.state(i).occupations();
                let kept: Vec<u32> = keep.iter().map(|&m| occ[m]).collect();
                let env_pat: Vec<u32> = env.iter().map(|&m| occ[m]).collect();
                let ri = reduced.index_of(&kept).expect("reduced basis covers kept patterns");
                let sign = reorder_sign(self.basis.kind(), occ, &order);
                groups.entry(env_pat).or_default().push((local, ri, sign));
            }
            for members in groups.values() {
                for &(li, ri, si) in members {
                    for &(lj, rj, sj) in members {
                        acc[(ri, rj)] += b.matrix[(li, lj)] * (si * sj);
                    }
                }
            }
        }
        let support: Vec<usize> = (0..reduced.dim())
            .filter(|&i| acc.row(i).iter().any(|z| *z != ZERO))
            .collect();
        let m = CMatrix::from_fn(support.len(), support.len(), |r, c| acc[(support[r], support[c])]);
        DensityMatrix::from_blocks(&reduced, vec![(support, m)])
    }

    /// Amplitudes regrouped as a bipartite matrix over (A pattern, B pattern).
    /// The partition must cover every mode. With `sector = Some((na, nb))`
    /// only states with those local particle numbers are kept.
    pub fn bipartite(&self, partition: &Bipartition, sector: Option<(usize, usize)>) -> Result<BipartiteState> {
        partition.validate_for(self.basis.modes())?;
        if !partition.is_complete(self.basis.modes()) {
            return Err(Error::InvalidPartition(
                "bipartite view needs a partition covering every mode; reduce first".into(),
            ));
        }
        let order: Vec<usize> = partition.a.iter().chain(partition.b.iter()).copied().collect();
        let mut members: Vec<(usize, Vec<u32>, Vec<u32>, f64)> = Vec::new();
        for b in &self.blocks {
            for &i in &b.indices {
                let s = self.basis.state(i);
                let pa: Vec<u32> = partition.a.iter().map(|&m| s.occupations()[m]).collect();
                let pb: Vec<u32> = partition.b.iter().map(|&m| s.occupations()[m]).collect();
                if let Some((na, nb)) = sector {
                    let ca: u32 = pa.iter().sum();
                    let cb: u32 = pb.iter().sum();
                    if ca as usize != na || cb as usize != nb {
                        continue;
                    }
                }
                let sign = reorder_sign(self.basis.kind(), s.occupations(), &order);
                members.push((i, pa, pb, sign));
            }
        }
        let mut patterns_a: Vec<Vec<u32>> = members
            .iter()
            .map(|m| m.1.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut patterns_b: Vec<Vec<u32>> = members
            .iter()
            .map(|m| m.2.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        patterns_a.reverse();
        patterns_b.reverse();
        let db = patterns_b.len();
        let pos = |pats: &Vec<Vec<u32>>, p: &Vec<u32>| pats.iter().position(|q| q == p).expect("pattern listed");
        let idx: Vec<usize> = members
            .iter()
            .map(|(_, pa, pb, _)| pos(&patterns_a, pa) * db + pos(&patterns_b, pb))
            .collect();
        let dim = patterns_a.len() * db;
        let mut m = CMatrix::zeros(dim, dim);
        for (x, (i, _, _, si)) in members.iter().enumerate() {
            for (y, (j, _, _, sj)) in members.iter().enumerate() {
                let v = self.entry(*i, *j);
                if v != ZERO {
                    m[(idx[x], idx[y])] = v * (si * sj);
                }
            }
        }
        let weight = m.diagonal().iter().map(|z| z.re).sum();
        Ok(BipartiteState {
            patterns_a,
            patterns_b,
            matrix: m,
            weight,
        })
    }
}

/// Sign of reordering the occupied fermionic modes of `occ` from canonical
/// order into the order listed in `order` (which must be a permutation of
/// all modes). Bosons always give `+1`.
pub(crate) fn reorder_sign(kind: ParticleKind, occ: &[u32], order: &[usize]) -> f64 {
    if kind == ParticleKind::Boson {
        return 1.0;
    }
    let occupied: Vec<usize> = order.iter().copied().filter(|&m| occ[m] == 1).collect();
    let mut inversions = 0usize;
    for x in 0..occupied.len() {
        for y in x + 1..occupied.len() {
            if occupied[x] > occupied[y] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Disjoint mode sets controlled by parties A and B.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    a: Vec<usize>,
    b: Vec<usize>,
}

impl Bipartition {
    pub fn new(a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidPartition("both parties need at least one mode".into()));
        }
        let sa: BTreeSet<usize> = a.iter().copied().collect();
        let sb: BTreeSet<usize> = b.iter().copied().collect();
        if sa.len() != a.len() || sb.len() != b.len() {
            return Err(Error::InvalidPartition("a mode is listed twice".into()));
        }
        if let Some(m) = sa.intersection(&sb).next() {
            return Err(Error::InvalidPartition(format!("mode {m} is assigned to both parties")));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn b(&self) -> &[usize] {
        &self.b
    }

    pub fn validate_for(&self, modes: usize) -> Result<()> {
        match self.a.iter().chain(self.b.iter()).find(|&&m| m >= modes) {
            Some(&m) => Err(Error::InvalidMode { mode: m, modes }),
            None => Ok(()),
        }
    }

    pub fn is_complete(&self, modes: usize) -> bool {
        self.a.len() + self.b.len() == modes
    }

    /// The same split after renumbering modes by their position in `A ++ B`.
    pub fn relabeled(&self) -> Self {
        let na = self.a.len();
        Self {
            a: (0..na).collect(),
            b: (na..na + self.b.len()).collect(),
        }
    }

    /// Every split of `modes` modes into two non-empty parties covering all
    /// modes, each unordered pair listed once (mode 0 always belongs to A).
    pub fn all_complete(modes: usize) -> Vec<Bipartition> {
        let mut out = Vec::new();
        if modes < 2 {
            return out;
        }
        for mask in 0u64..(1u64 << modes) {
            if mask & 1 == 0 || mask == (1u64 << modes) - 1 {
                continue;
            }
            let a = (0..modes).filter(|m| mask >> m & 1 == 1).collect();
            let b = (0..modes).filter(|m| mask >> m & 1 == 0).collect();
            out.push(Bipartition { a, b });
        }
        out
    }
}

/// Local particle numbers `(nA, nB)` present in `basis` for a partition.
pub fn local_sectors(basis: &FockBasis, partition: &Bipartition) -> Vec<(usize, usize)> {
    let set: BTreeSet<(usize, usize)> = basis
        .states()
        .iter()
        .map(|s| (s.count_on(partition.a()), s.count_on(partition.b())))
        .collect();
    set.into_iter().collect()
}

/// `Pi rho Pi` for the projector onto `nA` particles on A's modes and `nB`
/// on B's. The weight of the result is the probability `P_{nA,nB}`; an
/// absent sector gives an empty, zero-weight matrix.
pub fn project_local_number(
    rho: &DensityMatrix,
    partition: &Bipartition,
    n_a: usize,
    n_b: usize,
) -> Result<DensityMatrix> {
    partition.validate_for(rho.basis().modes())?;
    let basis = rho.basis();
    let in_sector = |i: usize| {
        let s = basis.state(i);
        s.count_on(partition.a()) == n_a && s.count_on(partition.b()) == n_b
    };
    let mut blocks = Vec::new();
    for b in rho.blocks() {
        let keep: Vec<usize> = (0..b.indices.len()).filter(|&k| in_sector(b.indices[k])).collect();
        if keep.is_empty() {
            continue;
        }
        let indices = keep.iter().map(|&k| b.indices[k]).collect();
        let m = CMatrix::from_fn(keep.len(), keep.len(), |r, c| b.matrix[(keep[r], keep[c])]);
        blocks.push((indices, m));
    }
    DensityMatrix::from_blocks(basis, blocks)
}

/// Density matrix regrouped over local occupation patterns of A and B,
/// indexed `ia * dim_b + ib`.
#[derive(Debug, Clone)]
pub struct BipartiteState {
    pub patterns_a: Vec<Vec<u32>>,
    pub patterns_b: Vec<Vec<u32>>,
    pub matrix: CMatrix,
    pub weight: f64,
}

impl BipartiteState {
    pub fn dim_a(&self) -> usize {
        self.patterns_a.len()
    }

    pub fn dim_b(&self) -> usize {
        self.patterns_b.len()
    }

    pub fn normalized_matrix(&self) -> CMatrix {
        if self.weight > 0.0 {
            &self.matrix / re(self.weight)
        } else {
            self.matrix.clone()
        }
    }

    /// Partial trace over B.
    pub fn reduced_a(&self) -> CMatrix {
        partial_trace_b(&self.matrix, self.dim_a(), self.dim_b())
    }

    /// Partial transpose on B.
    pub fn partial_transpose_b(&self) -> CMatrix {
        partial_transpose_b(&self.matrix, self.dim_a(), self.dim_b())
    }
}

pub fn partial_trace_b(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |i, j| (0..db).map(|k| m[(i * db + k, j * db + k)]).sum())
}

pub fn partial_transpose_b(m: &CMatrix, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da * db, da * db, |r, c| {
        let (i, k) = (r / db, r % db);
        let (j, l) = (c / db, c % db);
        m[(i * db + l, j * db + k)]
    })
}

/// Local state of one spinful lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LocalState {
    Empty,
    Up,
    Down,
    Double,
}

impl LocalState {
    pub const ALL: [LocalState; 4] = [LocalState::Empty, LocalState::Up, LocalState::Down, LocalState::Double];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            LocalState::Empty => "0",
            LocalState::Up => "up",
            LocalState::Down => "dn",
            LocalState::Double => "2",
        }
    }

    /// Creation string producing the state from the empty site:
    /// `up = c_up^dag`, `dn = c_dn^dag`, `2 = c_up^dag c_dn^dag`.
    pub(crate) fn creation(self, site: usize) -> Vec<Factor> {
        let (up, dn) = (spin_orbital(site, Spin::Up), spin_orbital(site, Spin::Down));
        match self {
            LocalState::Empty => vec![],
            LocalState::Up => vec![Factor::Create(up)],
            LocalState::Down => vec![Factor::Create(dn)],
            LocalState::Double => vec![Factor::Create(up), Factor::Create(dn)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

/// Canonical spin-orbital index: site-major, up before down.
#[inline]
pub fn spin_orbital(site: usize, spin: Spin) -> usize {
    2 * site + if spin == Spin::Up { 0 } else { 1 }
}

/// Operator string whose expectation value is entry
/// `((row_a,row_b),(col_a,col_b))` of the two-site matrix:
/// `C_A(col_a) C_B(col_b) P_vac C_B(row_b)^dag C_A(row_a)^dag`, where
/// `P_vac` empties all four spin-orbitals of the two sites.
pub(crate) fn two_site_entry_string(
    site_a: usize,
    site_b: usize,
    row: (LocalState, LocalState),
    col: (LocalState, LocalState),
) -> Vec<Factor> {
    let mut f = col.0.creation(site_a);
    f.extend(col.1.creation(site_b));
    for site in [site_a, site_b] {
        f.push(Factor::Empty(spin_orbital(site, Spin::Up)));
        f.push(Factor::Empty(spin_orbital(site, Spin::Down)));
    }
    let dagger = |v: Vec<Factor>| -> Vec<Factor> {
        v.into_iter()
            .rev()
            .map(|x| match x {
                Factor::Create(m) => Factor::Annihilate(m),
                Factor::Annihilate(m) => Factor::Create(m),
                e => e,
            })
            .collect()
    };
    // (C_A(a) C_B(b))^dag = C_B(b)^dag C_A(a)^dag
    let mut right = row.0.creation(site_a);
    right.extend(row.1.creation(site_b));
    f.extend(dagger(right));
    f
}

/// 16x16 reduced density matrix of two spinful sites over local states
/// `{0, up, dn, 2} x {0, up, dn, 2}` (index `4 * a + b`), in the basis
/// `C_A(a) C_B(b) |vac>`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSiteMatrix {
    pub matrix: CMatrix,
}

/// Index of the one-particle-per-site states `(up,up), (up,dn), (dn,up), (dn,dn)`.
pub const ONE_PER_SITE: [usize; 4] = [5, 6, 9, 10];

impl TwoSiteMatrix {
    pub fn index(a: LocalState, b: LocalState) -> usize {
        4 * a.index() + b.index()
    }

    pub fn get(&self, row: (LocalState, LocalState), col: (LocalState, LocalState)) -> Complex64 {
        self.matrix[(Self::index(row.0, row.1), Self::index(col.0, col.1))]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }

    /// The 4x4 one-particle-per-site block over (up up, up dn, dn up, dn dn),
    /// unnormalized.
    pub fn projected_block(&self) -> CMatrix {
        CMatrix::from_fn(4, 4, |r, c| self.matrix[(ONE_PER_SITE[r], ONE_PER_SITE[c])])
    }

    /// Probability of exactly one particle on each site.
    pub fn p11(&self) -> f64 {
        ONE_PER_SITE.iter().map(|&i| self.matrix[(i, i)].re).sum()
    }
}

/// Two-site reduced density matrix computed from expectation values of
/// operator strings, so fermionic signs come from the operator algebra.
pub fn reduce_two_site(rho: &DensityMatrix, site_a: usize, site_b: usize) -> Result<TwoSiteMatrix> {
    let basis = rho.basis();
    if basis.kind() != ParticleKind::Fermion || basis.modes() % 2 != 0 {
        return Err(Error::InvalidPair(
            "two-site reduction needs a spinful fermion basis (two spin-orbitals per site)".into(),
        ));
    }
    let sites = basis.modes() / 2;
    if site_a == site_b {
        return Err(Error::InvalidPair(format!("site {site_a} paired with itself")));
    }
    if site_a >= sites || site_b >= sites {
        return Err(Error::InvalidPair(format!(
            "sites ({site_a},{site_b}) outside a lattice of {sites} sites"
        )));
    }
    let mut m = CMatrix::zeros(16, 16);
    for &ra in &LocalState::ALL {
        for &rb in &LocalState::ALL {
            for &ca in &LocalState::ALL {
                for &cb in &LocalState::ALL {
                    let s = two_site_entry_string(site_a, site_b, (ra, rb), (ca, cb));
                    m[(TwoSiteMatrix::index(ra, rb), TwoSiteMatrix::index(ca, cb))] = rho.expect_factors(&s);
                }
            }
        }
    }
    Ok(TwoSiteMatrix { matrix: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::basis::enumerate_basis;
    use crate::fock::operator::{Ladder, Term};
    use crate::linalg::c;

    fn arc(b: FockBasis) -> Arc<FockBasis> {
        Arc::new(b)
    }

    #[test]
    fn projector_weights_sum_to_one() {
        let b = arc(enumerate_basis(ParticleKind::Boson, 4, Some(2)).unwrap());
        let amps = (0..b.dim()).map(|i| c(1.0 + i as f64, 0.5 - i as f64 * 0.1));
        let psi = StateVector::new(&b, crate::linalg::CVector::from_iterator(b.dim(), amps))
            .unwrap()
            .normalized()
            .unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let p = Bipartition::new(vec![0, 1], vec![2, 3]).unwrap();
        let total: f64 = local_sectors(&b, &p)
            .into_iter()
            .map(|(na, nb)| project_local_number(&rho, &p, na, nb).unwrap().weight())
            .sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sector_has_zero_weight() {
        let b = arc(enumerate_basis(ParticleKind::Fermion, 4, Some(2)).unwrap());
        let psi = StateVector::basis_state(&b, &[1, 1, 0, 0]).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let p = Bipartition::new(vec![0, 1], vec![2, 3]).unwrap();
        let proj = project_local_number(&rho, &p, 1, 1).unwrap();
        assert_eq!(proj.weight(), 0.0);
        assert!(proj.blocks().is_empty());
    }

    #[test]
    fn partition_validation() {
        assert!(Bipartition::new(vec![0], vec![0, 1]).is_err());
        assert!(Bipartition::new(vec![], vec![1]).is_err());
        assert_eq!(Bipartition::all_complete(4).len(), 7);
    }

    #[test]
    fn product_state_reduces_to_rank_one_entry() {
        // |up>_0 |dn>_1 on a 3-site lattice, site 2 empty
        let b = arc(enumerate_basis(ParticleKind::Fermion, 6, None).unwrap());
        let psi = StateVector::basis_state(&b, &[1, 0, 0, 1, 0, 0]).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let two = reduce_two_site(&rho, 0, 1).unwrap();
        let i = TwoSiteMatrix::index(LocalState::Up, LocalState::Down);
        for r in 0..16 {
            for col in 0..16 {
                let expected = if r == i && col == i { 1.0 } else { 0.0 };
                assert!((two.matrix[(r, col)] - re(expected)).norm() < 1e-14);
            }
        }
        assert!(matches!(reduce_two_site(&rho, 1, 1), Err(Error::InvalidPair(_))));
    }

    #[test]
    fn two_site_reduction_agrees_with_mode_partial_trace() {
        // singlet between sites 0 and 2 plus an extra electron on site 1
        let b = arc(enumerate_basis(ParticleKind::Fermion, 6, Some(3)).unwrap());
        let s = 1.0 / 2f64.sqrt();
        let psi = StateVector::from_creation_strings(
            &b,
            &[
                (re(s), vec![Ladder::Create(0), Ladder::Create(2), Ladder::Create(5)]),
                (re(-s), vec![Ladder::Create(1), Ladder::Create(2), Ladder::Create(4)]),
            ],
        )
        .unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let two = reduce_two_site(&rho, 0, 2).unwrap();
        // route 2: trace out site 1 by reordering modes
        let reduced = rho.reduce_to_modes(&[0, 1, 4, 5]).unwrap();
        let rb = reduced.basis().clone();
        let occ_of = |a: LocalState, bb: LocalState| -> Vec<u32> {
            let f = |s: LocalState| match s {
                LocalState::Empty => [0, 0],
                LocalState::Up => [1, 0],
                LocalState::Down => [0, 1],
                LocalState::Double => [1, 1],
            };
            let (x, y) = (f(a), f(bb));
            vec![x[0], x[1], y[0], y[1]]
        };
        for &ra in &LocalState::ALL {
            for &rbs in &LocalState::ALL {
                for &ca in &LocalState::ALL {
                    for &cbs in &LocalState::ALL {
                        let i = rb.index_of(&occ_of(ra, rbs)).unwrap();
                        let j = rb.index_of(&occ_of(ca, cbs)).unwrap();
                        // creation-string basis vs canonical-order basis differ by the
                        // ordering sign of |a b>, which is +1 for these strings
                        let direct = reduced.entry(i, j);
                        let via = two.get((ra, rbs), (ca, cbs));
                        assert!((direct - via).norm() < 1e-12, "{ra:?}{rbs:?},{ca:?}{cbs:?}");
                    }
                }
            }
        }
        assert!((two.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expectation_matches_dense_trace() {
        let b = arc(enumerate_basis(ParticleKind::Fermion, 4, Some(2)).unwrap());
        let h = crate::fock::operator::build_operator(
            &b,
            &[
                Term::hopping(-1.0, 0, 1),
                Term::hopping(-1.0, 1, 0),
                Term::hopping(0.5, 2, 3),
                Term::hopping(0.5, 3, 2),
            ],
        )
        .unwrap();
        let amps = (0..b.dim()).map(|i| c(i as f64 - 2.0, 0.3 * i as f64));
        let psi = StateVector::new(&b, crate::linalg::CVector::from_iterator(b.dim(), amps)).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let dense = (rho.to_dense() * h.to_dense()).trace();
        assert!((rho.expectation(&h) - dense).norm() < 1e-12);
        assert!((h.expectation(&psi).unwrap() - dense).norm() < 1e-12);
    }

    #[test]
    fn partial_transpose_of_singlet_has_negative_half() {
        let s = 1.0 / 2f64.sqrt();
        let v = [0.0, s, -s, 0.0];
        let m = CMatrix::from_fn(4, 4, |i, j| re(v[i] * v[j]));
        let pt = partial_transpose_b(&m, 2, 2);
        let vals = hermitian_eigenvalues(&pt);
        assert!((vals[0] + 0.5).abs() < 1e-12);
    }
}
