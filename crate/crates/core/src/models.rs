//! Lattice Hamiltonians and closed-form reference states.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fock::{
    build_operator, enumerate_basis, spin_orbital, transform_terms, Bipartition, FockBasis, Ladder, Operator,
    ParticleKind, Spin, StateVector, Term,
};
use crate::linalg::{c, re, CMatrix, CVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    BoseHubbardRing,
    SpinlessFermionRing,
    HubbardDimer,
    SpinfulFermionLattice,
}

impl ModelFamily {
    pub fn name(self) -> &'static str {
        match self {
            ModelFamily::BoseHubbardRing => "bose-hubbard-ring",
            ModelFamily::SpinlessFermionRing => "spinless-fermion-ring",
            ModelFamily::HubbardDimer => "hubbard-dimer",
            ModelFamily::SpinfulFermionLattice => "spinful-fermion-lattice",
        }
    }

    pub fn kind(self) -> ParticleKind {
        match self {
            ModelFamily::BoseHubbardRing => ParticleKind::Boson,
            _ => ParticleKind::Fermion,
        }
    }

    /// Modes per lattice site.
    pub fn modes_per_site(self) -> usize {
        match self {
            ModelFamily::HubbardDimer | ModelFamily::SpinfulFermionLattice => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bose-hubbard-ring" => Ok(ModelFamily::BoseHubbardRing),
            "spinless-fermion-ring" => Ok(ModelFamily::SpinlessFermionRing),
            "hubbard-dimer" => Ok(ModelFamily::HubbardDimer),
            "spinful-fermion-lattice" => Ok(ModelFamily::SpinfulFermionLattice),
            other => Err(Error::InvalidParameter(format!("unknown model family `{other}`"))),
        }
    }
}

/// Parameters of one of the supported lattice models.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub sites: usize,
    pub t: f64,
    pub u: f64,
    pub periodic: bool,
}

impl ModelSpec {
    pub fn new(family: ModelFamily, sites: usize, t: f64, u: f64) -> Self {
        let sites = if family == ModelFamily::HubbardDimer { 2 } else { sites };
        Self {
            family,
            sites,
            t,
            u,
            periodic: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 sites, got {}",
                self.sites
            )));
        }
        if self.family == ModelFamily::HubbardDimer && self.sites != 2 {
            return Err(Error::InvalidParameter("the Hubbard dimer has exactly 2 sites".into()));
        }
        if !self.t.is_finite() || !self.u.is_finite() {
            return Err(Error::InvalidParameter("t and U must be finite".into()));
        }
        Ok(())
    }

    pub fn modes(&self) -> usize {
        self.sites * self.family.modes_per_site()
    }

    /// Hamiltonian terms in the canonical mode numbering.
    pub fn terms(&self) -> Vec<Term> {
        let links = ring_links(self.sites, self.periodic);
        match self.family {
            ModelFamily::BoseHubbardRing => {
                let mut terms = hopping_terms(&links, self.t);
                if self.u != 0.0 {
                    terms.extend((0..self.sites).map(|j| Term::density_density(self.u, j, j)));
                }
                terms
            }
            ModelFamily::SpinlessFermionRing => hopping_terms(&links, self.t),
            ModelFamily::HubbardDimer | ModelFamily::SpinfulFermionLattice => {
                hubbard_terms(&links, self.sites, self.t, self.u)
            }
        }
    }

    /// Basis for a particle number, or the full Fock space for fermions when
    /// `particles` is `None`.
    pub fn basis(&self, particles: Option<usize>) -> Result<Arc<FockBasis>> {
        self.validate()?;
        if self.family.kind() == ParticleKind::Boson && particles.is_none() {
            return Err(Error::InvalidParameter("bosonic models need a particle number".into()));
        }
        Ok(Arc::new(enumerate_basis(self.family.kind(), self.modes(), particles)?))
    }

    pub fn hamiltonian(&self, particles: Option<usize>) -> Result<Operator> {
        let basis = self.basis(particles)?;
        build_operator(&basis, &self.terms())
    }
}

/// Nearest-neighbour links of a chain, closed into a ring when `periodic`.
/// Two sites share a single link.
pub fn ring_links(sites: usize, periodic: bool) -> Vec<(usize, usize)> {
    let mut links: Vec<(usize, usize)> = (0..sites.saturating_sub(1)).map(|j| (j, j + 1)).collect();
    if periodic && sites > 2 {
        links.push((sites - 1, 0));
    }
    links
}

fn hopping_terms(links: &[(usize, usize)], t: f64) -> Vec<Term> {
    links
        .iter()
        .flat_map(|&(i, j)| [Term::hopping(-t, i, j), Term::hopping(-t, j, i)])
        .collect()
}

/// Spin-conserving hopping plus on-site `U n_up n_dn`.
pub fn hubbard_terms(links: &[(usize, usize)], sites: usize, t: f64, u: f64) -> Vec<Term> {
    let mut terms = Vec::new();
    for spin in [Spin::Up, Spin::Down] {
        let spin_links: Vec<(usize, usize)> = links
            .iter()
            .map(|&(i, j)| (spin_orbital(i, spin), spin_orbital(j, spin)))
            .collect();
        terms.extend(hopping_terms(&spin_links, t));
    }
    if u != 0.0 {
        terms.extend(
            (0..sites).map(|j| Term::density_density(u, spin_orbital(j, Spin::Up), spin_orbital(j, Spin::Down))),
        );
    }
    terms
}

/// `-t sum_j (b_j^dag b_{j+1} + h.c.) + U sum_j n_j (n_j - 1)` on a ring of
/// `m` sites with `n` bosons.
pub fn bose_hubbard_ring(m: usize, t: f64, u: f64, n: usize) -> Result<Operator> {
    ModelSpec::new(ModelFamily::BoseHubbardRing, m, t, u).hamiltonian(Some(n))
}

/// Nearest-neighbour hopping of `n` spinless fermions on a ring of `m` sites.
pub fn spinless_fermion_ring(m: usize, t: f64, n: usize) -> Result<Operator> {
    if n > m {
        return Err(Error::InvalidSector(format!("{n} fermions do not fit on {m} sites")));
    }
    ModelSpec::new(ModelFamily::SpinlessFermionRing, m, t, 0.0).hamiltonian(Some(n))
}

/// Two electrons on two sites (four spin-orbitals, dimension 6).
pub fn hubbard_dimer(t: f64, u: f64) -> Result<Operator> {
    if t <= 0.0 || u < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dimer needs t > 0 and U >= 0, got t={t}, U={u}"
        )));
    }
    ModelSpec::new(ModelFamily::HubbardDimer, 2, t, u).hamiltonian(Some(2))
}

/// Non-interacting electrons on `m` sites over the full Fock space of `2m`
/// spin-orbitals.
pub fn spinful_fermion_lattice(m: usize, t: f64, periodic: bool) -> Result<Operator> {
    let mut spec = ModelSpec::new(ModelFamily::SpinfulFermionLattice, m, t, 0.0);
    spec.periodic = periodic;
    spec.hamiltonian(None)
}

/// Single-particle band `E_k = -2t cos(2 pi k / m)`, `k = 0..m`.
pub fn band_energies(m: usize, t: f64) -> Vec<f64> {
    (0..m)
        .map(|k| -2.0 * t * (2.0 * std::f64::consts::PI * k as f64 / m as f64).cos())
        .collect()
}

/// `alpha(x) = x + sqrt(1 + x^2)`.
pub fn dimer_alpha(x: f64) -> f64 {
    x + (1.0 + x * x).sqrt()
}

/// Probability of one electron per site in the dimer ground state.
pub fn dimer_p11(t: f64, u: f64) -> f64 {
    let a = dimer_alpha(u / (4.0 * t));
    a * a / (1.0 + a * a)
}

fn dimer_strings(alpha: f64) -> Vec<(f64, Vec<Ladder>)> {
    let (lu, ld) = (spin_orbital(0, Spin::Up), spin_orbital(0, Spin::Down));
    let (ru, rd) = (spin_orbital(1, Spin::Up), spin_orbital(1, Spin::Down));
    vec![
        (1.0, vec![Ladder::Create(lu), Ladder::Create(ld)]),
        (1.0, vec![Ladder::Create(ru), Ladder::Create(rd)]),
        (alpha, vec![Ladder::Create(lu), Ladder::Create(rd)]),
        (-alpha, vec![Ladder::Create(ld), Ladder::Create(ru)]),
    ]
}

fn dimer_basis() -> Result<Arc<FockBasis>> {
    Ok(Arc::new(enumerate_basis(ParticleKind::Fermion, 4, Some(2))?))
}

/// Closed-form dimer ground state `G0 |vac>` (normalized), with
/// `G0 = c_Lu^dag c_Ld^dag + c_Ru^dag c_Rd^dag + alpha (c_Lu^dag c_Rd^dag - c_Ld^dag c_Ru^dag)`
/// and `alpha = alpha(U / 4t)`.
pub fn dimer_ground_analytic(t: f64, u: f64) -> Result<StateVector> {
    if t == 0.0 {
        return Err(Error::DegenerateLimit(
            "t = 0 leaves a degenerate ground manifold; diagonalize the Hamiltonian instead".into(),
        ));
    }
    if t < 0.0 || u < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "dimer needs t > 0 and U >= 0, got t={t}, U={u}"
        )));
    }
    let strings: Vec<_> = dimer_strings(dimer_alpha(u / (4.0 * t)))
        .into_iter()
        .map(|(a, l)| (re(a), l))
        .collect();
    StateVector::from_creation_strings(&dimer_basis()?, &strings)?.normalized()
}

/// Site-to-momentum map of the dimer: `c_{j s} = sum_k w[(j s, k s)] C_{k s}`
/// with `C_{k s} = (c_{L s} + e^{i k pi} c_{R s}) / sqrt(2)`. Momentum modes
/// are numbered `2k + s` like sites.
pub fn dimer_momentum_transform() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut w = CMatrix::zeros(4, 4);
    for s in [Spin::Up, Spin::Down] {
        let (l, r) = (spin_orbital(0, s), spin_orbital(1, s));
        let (k0, k1) = (spin_orbital(0, s), spin_orbital(1, s));
        w[(l, k0)] = re(h);
        w[(l, k1)] = re(h);
        w[(r, k0)] = re(h);
        w[(r, k1)] = re(-h);
    }
    w
}

/// Dimer Hamiltonian written in the momentum modes.
pub fn hubbard_dimer_momentum(t: f64, u: f64) -> Result<Operator> {
    let spec = ModelSpec::new(ModelFamily::HubbardDimer, 2, t, u);
    build_operator(
        &dimer_basis()?,
        &transform_terms(&spec.terms(), &dimer_momentum_transform()),
    )
}

/// Closed-form dimer ground state expressed in the momentum modes.
pub fn dimer_ground_momentum(t: f64, u: f64) -> Result<StateVector> {
    if t <= 0.0 {
        return dimer_ground_analytic(t, u);
    }
    let terms: Vec<Term> = dimer_strings(dimer_alpha(u / (4.0 * t)))
        .into_iter()
        .map(|(a, l)| Term::real(a, l))
        .collect();
    let strings: Vec<_> = transform_terms(&terms, &dimer_momentum_transform())
        .into_iter()
        .map(|t| (t.coefficient, t.ladders))
        .collect();
    StateVector::from_creation_strings(&dimer_basis()?, &strings)?.normalized()
}

/// `C_{k_1}^dag C_{k_2}^dag ... |vac>` for spinless fermions on an `m`-site
/// ring, with `C_k = m^(-1/2) sum_j e^{2 pi i j k / m} c_j`.
pub fn spinless_momentum_state(m: usize, ks: &[usize]) -> Result<StateVector> {
    let basis = Arc::new(enumerate_basis(ParticleKind::Fermion, m, Some(ks.len()))?);
    let norm = 1.0 / (m as f64).sqrt();
    let w = CMatrix::from_fn(m, m, |k, j| {
        num_complex::Complex64::from_polar(norm, 2.0 * std::f64::consts::PI * (j * k) as f64 / m as f64)
    });
    for &k in ks {
        if k >= m {
            return Err(Error::InvalidMode { mode: k, modes: m });
        }
    }
    let term = Term::real(1.0, ks.iter().map(|&k| Ladder::Create(k)).collect());
    let strings: Vec<_> = transform_terms(&[term], &w)
        .into_iter()
        .map(|t| (t.coefficient, t.ladders))
        .collect();
    StateVector::from_creation_strings(&basis, &strings)
}

/// Ground state of `n` free bosons on an `m`-site ring: all bosons in the
/// uniform mode, amplitude `sqrt(n! / prod n_j!) / m^(n/2)`.
pub fn free_boson_ground(m: usize, n: usize) -> Result<StateVector> {
    let basis = Arc::new(enumerate_basis(ParticleKind::Boson, m, Some(n))?);
    let ln_fact = |k: u32| (1..=k).map(|x| (x as f64).ln()).sum::<f64>();
    let amps = basis.states().iter().map(|s| {
        let log = 0.5 * (ln_fact(n as u32) - s.occupations().iter().map(|&k| ln_fact(k)).sum::<f64>())
            - 0.5 * n as f64 * (m as f64).ln();
        re(log.exp())
    });
    StateVector::new(&basis, CVector::from_iterator(basis.dim(), amps))
}

/// `U/t -> infinity` ground state of two bosons on a four-site ring in the
/// sign convention
/// `[|1010> + |0101> - (|1100> + |0110> + |0011> + |1001>)/sqrt(2)] / 2`.
/// It is the limit for hopping `-t` with `t < 0`; for `t > 0` the limit
/// differs by the mode-local phase `(-1)^(n_0 + n_2)`.
pub fn hardcore_boson_limit_state() -> StateVector {
    let basis = Arc::new(enumerate_basis(ParticleKind::Boson, 4, Some(2)).expect("valid basis"));
    let s = -std::f64::consts::FRAC_1_SQRT_2 / 2.0;
    let mut amps = CVector::zeros(basis.dim());
    for (occ, a) in [
        ([1, 0, 1, 0], 0.5),
        ([0, 1, 0, 1], 0.5),
        ([1, 1, 0, 0], s),
        ([0, 1, 1, 0], s),
        ([0, 0, 1, 1], s),
        ([1, 0, 0, 1], s),
    ] {
        amps[basis.index_of(&occ).expect("occupation in basis")] = c(a, 0.0);
    }
    StateVector::new(&basis, amps).expect("dimension matches")
}

/// Standard partitions of the four-site ring and the dimer.
pub mod partitions {
    use super::*;

    /// A holds sites {0,1}, B holds {2,3}.
    pub fn ring_adjacent() -> Bipartition {
        Bipartition::new(vec![0, 1], vec![2, 3]).expect("valid")
    }

    /// A holds sites {0,2}, B holds {1,3}.
    pub fn ring_diagonal() -> Bipartition {
        Bipartition::new(vec![0, 2], vec![1, 3]).expect("valid")
    }

    /// Left site versus right site of the dimer.
    pub fn dimer_sites() -> Bipartition {
        Bipartition::new(
            vec![spin_orbital(0, Spin::Up), spin_orbital(0, Spin::Down)],
            vec![spin_orbital(1, Spin::Up), spin_orbital(1, Spin::Down)],
        )
        .expect("valid")
    }

    /// Both up modes versus both down modes.
    pub fn dimer_spins() -> Bipartition {
        Bipartition::new(
            vec![spin_orbital(0, Spin::Up), spin_orbital(1, Spin::Up)],
            vec![spin_orbital(0, Spin::Down), spin_orbital(1, Spin::Down)],
        )
        .expect("valid")
    }

    /// Momentum `k = 0` modes versus `k = 1` modes, for states expressed in
    /// momentum modes.
    pub fn dimer_momenta() -> Bipartition {
        dimer_sites()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, hermitian_eigenvalues};

    fn lowest(op: &Operator) -> f64 {
        hermitian_eigenvalues(&op.to_dense())[0]
    }

    #[test]
    fn free_bosons_fill_the_uniform_mode() {
        let h = bose_hubbard_ring(4, 1.0, 0.0, 2).unwrap();
        assert!((lowest(&h) + 4.0).abs() < 1e-12);
        let g = free_boson_ground(4, 2).unwrap();
        assert!((g.norm() - 1.0).abs() < 1e-12);
        assert!((g.amplitude(&[2, 0, 0, 0]).re - 0.25).abs() < 1e-15);
        let (vals, vecs) = hermitian_eigen(&h.to_dense());
        assert!(vals[1] - vals[0] > 1e-6);
        let overlap = vecs.column(0).dotc(g.amplitudes()).norm_sqr();
        assert!(overlap > 1.0 - 1e-10);
    }

    #[test]
    fn single_mode_free_boson_is_a_number_state() {
        let g = free_boson_ground(1, 3).unwrap();
        assert!((g.amplitude(&[3]).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spinless_ring_energies() {
        let h = spinless_fermion_ring(4, 1.0, 2).unwrap();
        let vals = hermitian_eigenvalues(&h.to_dense());
        assert!((vals[0] + 2.0).abs() < 1e-12 && (vals[1] + 2.0).abs() < 1e-12);
        assert!(vals[2] > -2.0 + 1e-6);
        assert!(lowest(&spinless_fermion_ring(4, 1.0, 0).unwrap()).abs() < 1e-15);
        assert!((lowest(&spinless_fermion_ring(6, 1.0, 3).unwrap()) + 4.0).abs() < 1e-12);
    }

    #[test]
    fn spinless_spectrum_is_sums_of_band_energies() {
        for m in 3..=6 {
            let e = band_energies(m, 0.7);
            for n in 0..=m {
                let mut expected = Vec::new();
                for mask in 0u32..(1 << m) {
                    if mask.count_ones() as usize == n {
                        expected.push((0..m).filter(|k| mask >> k & 1 == 1).map(|k| e[k]).sum::<f64>());
                    }
                }
                expected.sort_by(f64::total_cmp);
                let got = hermitian_eigenvalues(&spinless_fermion_ring(m, 0.7, n).unwrap().to_dense());
                for (a, b) in got.iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-10, "m={m} n={n}");
                }
            }
        }
    }

    #[test]
    fn dimer_matches_closed_form() {
        for u in [0.0, 1.0, 3.0, 10.0, 100.0] {
            let h = hubbard_dimer(1.0, u).unwrap();
            let (vals, vecs) = hermitian_eigen(&h.to_dense());
            assert!(vals[1] - vals[0] > 1e-6);
            let g = dimer_ground_analytic(1.0, u).unwrap();
            assert!(vecs.column(0).dotc(g.amplitudes()).norm_sqr() > 1.0 - 1e-10, "U={u}");
        }
        assert!((lowest(&hubbard_dimer(1.0, 0.0).unwrap()) + 2.0).abs() < 1e-12);
        assert!(matches!(
            dimer_ground_analytic(0.0, 1.0),
            Err(Error::DegenerateLimit(_))
        ));
        assert!((dimer_alpha(0.75) - 2.0).abs() < 1e-15);
        assert!((dimer_p11(1.0, 3.0) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn dimer_momentum_form_pairs_electrons_in_one_mode() {
        let u = 3.0;
        let a = dimer_alpha(u / 4.0);
        let g = dimer_ground_momentum(1.0, u).unwrap();
        let norm = ((1.0 + a).powi(2) + (1.0 - a).powi(2)).sqrt();
        // C_0u^dag C_0d^dag |vac> = |1,1,0,0>
        assert!((g.amplitude(&[1, 1, 0, 0]).re - (1.0 + a) / norm).abs() < 1e-12);
        assert!((g.amplitude(&[0, 0, 1, 1]).re - (1.0 - a) / norm).abs() < 1e-12);
        let hk = hubbard_dimer_momentum(1.0, u).unwrap();
        let e = hk.expectation(&g).unwrap().re;
        assert!((e - lowest(&hubbard_dimer(1.0, u).unwrap())).abs() < 1e-12);
    }

    #[test]
    fn two_site_lattice_is_the_free_dimer() {
        let basis = Arc::new(enumerate_basis(ParticleKind::Fermion, 4, Some(2)).unwrap());
        let lattice = build_operator(
            &basis,
            &ModelSpec::new(ModelFamily::SpinfulFermionLattice, 2, 1.0, 0.0).terms(),
        )
        .unwrap();
        let dimer = hubbard_dimer(1.0, 0.0).unwrap();
        assert_eq!(lattice.sub(&dimer).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn lattice_conserves_particle_number_and_spin() {
        let h = spinful_fermion_lattice(3, 1.0, true).unwrap();
        let b = h.basis().clone();
        let n = Operator::total_number(&b, None).unwrap();
        let up: Vec<usize> = (0..3).map(|j| spin_orbital(j, Spin::Up)).collect();
        let n_up = Operator::total_number(&b, Some(&up)).unwrap();
        assert_eq!(h.commutator(&n).unwrap().max_abs(), 0.0);
        assert_eq!(h.commutator(&n_up).unwrap().max_abs(), 0.0);
        assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn hardcore_state_is_the_large_u_ground_state() {
        let g = hardcore_boson_limit_state();
        assert!((g.norm() - 1.0).abs() < 1e-15);
        let h = bose_hubbard_ring(4, -1.0, 1e4, 2).unwrap();
        let (_, vecs) = hermitian_eigen(&h.to_dense());
        assert!(vecs.column(0).dotc(g.amplitudes()).norm_sqr() >= 0.9999);
    }

    #[test]
    fn rings_are_translation_invariant() {
        let h = bose_hubbard_ring(4, 1.0, 0.5, 3).unwrap();
        let b = h.basis().clone();
        let perm: Vec<usize> = b
            .states()
            .iter()
            .map(|s| {
                let o = s.occupations();
                let shifted: Vec<u32> = (0..4).map(|j| o[(j + 3) % 4]).collect();
                b.index_of(&shifted).unwrap()
            })
            .collect();
        assert_eq!(h.permuted(&perm).sub(&h).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn momentum_states_span_the_ring_ground_space() {
        let h = spinless_fermion_ring(4, 1.0, 2).unwrap();
        for ks in [[1, 0], [3, 0]] {
            let g = spinless_momentum_state(4, &ks).unwrap();
            assert!((g.norm() - 1.0).abs() < 1e-12);
            let e = h.expectation(&g).unwrap().re;
            assert!((e + 2.0).abs() < 1e-12);
        }
        let a = spinless_momentum_state(4, &[1, 0]).unwrap();
        let b = spinless_momentum_state(4, &[3, 0]).unwrap();
        assert!(a.inner(&b).norm() < 1e-12);
    }

    #[test]
    fn two_sites_share_one_link() {
        assert_eq!(ring_links(2, true), vec![(0, 1)]);
        assert_eq!(ring_links(4, true).len(), 4);
        assert_eq!(ring_links(4, false).len(), 3);
    }
}
