use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

/// Particle statistics of a Fock space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ParticleKind {
    Boson,
    Fermion,
}

impl fmt::Display for ParticleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParticleKind::Boson => f.write_str("boson"),
            ParticleKind::Fermion => f.write_str("fermion"),
        }
    }
}

/// Per-mode occupation numbers labelling one Fock basis state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OccupationState {
    kind: ParticleKind,
    occupations: Vec<u32>,
}

impl OccupationState {
    pub fn new(kind: ParticleKind, occupations: Vec<u32>) -> Result<Self> {
        if kind == ParticleKind::Fermion && occupations.iter().any(|&n| n > 1) {
            return Err(Error::InvalidSector(format!(
                "fermionic occupation vector {occupations:?} has a mode with more than one particle"
            )));
        }
        Ok(Self { kind, occupations })
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn modes(&self) -> usize {
        self.occupations.len()
    }

    pub fn total(&self) -> usize {
        self.occupations.iter().map(|&n| n as usize).sum()
    }

    /// Number of particles on a subset of modes.
    pub fn count_on(&self, modes: &[usize]) -> usize {
        modes.iter().map(|&m| self.occupations[m] as usize).sum()
    }
}

impl fmt::Display for OccupationState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("|")?;
        for (i, n) in self.occupations.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{n}")?;
        }
        f.write_str(">")
    }
}

/// Particle-number content of a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    /// Exactly `N` particles.
    Fixed(usize),
    /// Every particle number the statistics allow (fermions only).
    Full,
    /// Every state with at most `N` particles (bosonic truncation).
    Truncated(usize),
}

/// Enumerated occupation-number basis with an inverse index.
///
/// States are ordered lexicographically with the largest occupation of
/// mode 0 first, e.g. `|2,0>, |1,1>, |0,2>`.
#[derive(Debug, Clone)]
pub struct FockBasis {
    kind: ParticleKind,
    modes: usize,
    sector: Sector,
    states: Vec<OccupationState>,
    index: HashMap<Vec<u32>, usize>,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.modes == other.modes
            && self.sector == other.sector
            && self.states == other.states
    }
}

/// Enumerates the basis of `modes` modes, optionally restricted to a fixed
/// particle number. Bosons require a fixed number; use
/// [`FockBasis::truncated_bosons`] for a cut-off space.
pub fn enumerate_basis(kind: ParticleKind, modes: usize, total: Option<usize>) -> Result<FockBasis> {
    let sector = match total {
        Some(n) => Sector::Fixed(n),
        None => Sector::Full,
    };
    FockBasis::new(kind, modes, sector)
}

impl FockBasis {
    pub fn new(kind: ParticleKind, modes: usize, sector: Sector) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidSector("a basis needs at least one mode".into()));
        }
        match (kind, sector) {
            (ParticleKind::Fermion, Sector::Fixed(n)) if n > modes => {
                return Err(Error::InvalidSector(format!(
                    "{n} fermions do not fit into {modes} modes"
                )))
            }
            (ParticleKind::Fermion, Sector::Truncated(_)) => {
                return Err(Error::InvalidSector(
                    "truncation applies to bosons only; fermions use the full space".into(),
                ))
            }
            (ParticleKind::Boson, Sector::Full) => {
                return Err(Error::InvalidSector(
                    "the bosonic Fock space is infinite; fix or truncate the particle number".into(),
                ))
            }
            _ => {}
        }
        let cap = match kind {
            ParticleKind::Fermion => 1,
            ParticleKind::Boson => u32::MAX,
        };
        let mut raw = Vec::new();
        let mut current = vec![0u32; modes];
        match sector {
            Sector::Fixed(n) => fill_fixed(&mut raw, &mut current, 0, n as u32, cap),
            Sector::Full => fill_upto(&mut raw, &mut current, 0, modes as u32, cap),
            Sector::Truncated(n) => fill_upto(&mut raw, &mut current, 0, n as u32, cap),
        }
        let index = raw.iter().enumerate().map(|(i, occ)| (occ.clone(), i)).collect();
        let states = raw
            .into_iter()
            .map(|occupations| OccupationState { kind, occupations })
            .collect();
        Ok(Self {
            kind,
            modes,
            sector,
            states,
            index,
        })
    }

    /// All bosonic states with at most `max_total` particles.
    pub fn truncated_bosons(modes: usize, max_total: usize) -> Result<Self> {
        Self::new(ParticleKind::Boson, modes, Sector::Truncated(max_total))
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// The fixed particle number, if the basis has one.
    pub fn total(&self) -> Option<usize> {
        match self.sector {
            Sector::Fixed(n) => Some(n),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[OccupationState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &OccupationState {
        &self.states[i]
    }

    pub fn index_of(&self, occupations: &[u32]) -> Option<usize> {
        self.index.get(occupations).copied()
    }

    /// Whether a particle count is representable in this basis.
    pub fn admits_total(&self, n: usize) -> bool {
        match self.sector {
            Sector::Fixed(m) => m == n,
            Sector::Full => n <= self.modes,
            Sector::Truncated(m) => n <= m,
        }
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.modes {
            Err(Error::InvalidMode {
                mode,
                modes: self.modes,
            })
        } else {
            Ok(())
        }
    }
}

fn fill_fixed(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, mode: usize, remaining: u32, cap: u32) {
    if mode + 1 == current.len() {
        if remaining <= cap {
            current[mode] = remaining;
            out.push(current.clone());
        }
        return;
    }
    for n in (0..=remaining.min(cap)).rev() {
        current[mode] = n;
        fill_fixed(out, current, mode + 1, remaining - n, cap);
    }
    current[mode] = 0;
}

fn fill_upto(out: &mut Vec<Vec<u32>>, current: &mut Vec<u32>, mode: usize, budget: u32, cap: u32) {
    for n in (0..=budget.min(cap)).rev() {
        current[mode] = n;
        if mode + 1 == current.len() {
            out.push(current.clone());
        } else {
            fill_upto(out, current, mode + 1, budget - n, cap);
        }
    }
    current[mode] = 0;
}

/// Binomial coefficient, exact for the sizes used here.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions_match_combinatorics() {
        let b = enumerate_basis(ParticleKind::Boson, 4, Some(2)).unwrap();
        assert_eq!(b.dim(), 10);
        let f = enumerate_basis(ParticleKind::Fermion, 4, Some(2)).unwrap();
        assert_eq!(f.dim(), 6);
        let full = enumerate_basis(ParticleKind::Fermion, 4, None).unwrap();
        assert_eq!(full.dim(), 16);
        for m in 1..6u64 {
            for n in 0..5u64 {
                let b = enumerate_basis(ParticleKind::Boson, m as usize, Some(n as usize)).unwrap();
                assert_eq!(b.dim() as u64, binomial(n + m - 1, n));
                if n <= m {
                    let f = enumerate_basis(ParticleKind::Fermion, m as usize, Some(n as usize)).unwrap();
                    assert_eq!(f.dim() as u64, binomial(m, n));
                }
            }
        }
    }

    #[test]
    fn ordering_is_descending_lexicographic() {
        let b = enumerate_basis(ParticleKind::Boson, 3, Some(2)).unwrap();
        let got: Vec<&[u32]> = b.states().iter().map(|s| s.occupations()).collect();
        assert_eq!(
            got,
            vec![
                &[2, 0, 0][..],
                &[1, 1, 0],
                &[1, 0, 1],
                &[0, 2, 0],
                &[0, 1, 1],
                &[0, 0, 2]
            ]
        );
        let f = enumerate_basis(ParticleKind::Fermion, 2, None).unwrap();
        let got: Vec<&[u32]> = f.states().iter().map(|s| s.occupations()).collect();
        assert_eq!(got, vec![&[1, 1][..], &[1, 0], &[0, 1], &[0, 0]]);
    }

    #[test]
    fn index_is_a_bijection() {
        let b = enumerate_basis(ParticleKind::Fermion, 6, None).unwrap();
        for (i, s) in b.states().iter().enumerate() {
            assert_eq!(b.index_of(s.occupations()), Some(i));
        }
    }

    #[test]
    fn invalid_sectors_are_rejected() {
        assert!(matches!(
            enumerate_basis(ParticleKind::Fermion, 3, Some(4)),
            Err(Error::InvalidSector(_))
        ));
        assert!(enumerate_basis(ParticleKind::Boson, 3, None).is_err());
        assert!(enumerate_basis(ParticleKind::Boson, 0, Some(1)).is_err());
        assert!(OccupationState::new(ParticleKind::Fermion, vec![2, 0]).is_err());
    }

    #[test]
    fn truncated_bosons_count() {
        // states with total <= 2 on 3 modes: 1 + 3 + 6
        let b = FockBasis::truncated_bosons(3, 2).unwrap();
        assert_eq!(b.dim(), 10);
        assert_eq!(b.state(0).occupations(), &[2, 0, 0]);
    }
}
