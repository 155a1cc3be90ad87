use std::sync::Arc;

use num_complex::Complex64;

use super::basis::FockBasis;
use super::operator::{apply_factors, Factor, Ladder};
use crate::error::{Error, Result};
use crate::linalg::{CVector, ZERO};

/// A pure state expanded in a Fock basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amplitudes: CVector,
}

impl StateVector {
    pub fn new(basis: &Arc<FockBasis>, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self {
            basis: Arc::clone(basis),
            amplitudes,
        })
    }

    pub fn zeros(basis: &Arc<FockBasis>) -> Self {
        Self {
            basis: Arc::clone(basis),
            amplitudes: CVector::zeros(basis.dim()),
        }
    }

    /// A single occupation-number basis state.
    pub fn basis_state(basis: &Arc<FockBasis>, occupations: &[u32]) -> Result<Self> {
        let i = basis
            .index_of(occupations)
            .ok_or_else(|| Error::InvalidSector(format!("{occupations:?} is not a state of this basis")))?;
        let mut s = Self::zeros(basis);
        s.amplitudes[i] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Builds `sum_k coefficient_k * (ladder string)_k |vac>` directly from
    /// creation strings acting on the vacuum.
    pub fn from_creation_strings(basis: &Arc<FockBasis>, strings: &[(Complex64, Vec<Ladder>)]) -> Result<Self> {
        let mut s = Self::zeros(basis);
        for (coefficient, ladders) in strings {
            for l in ladders {
                basis.check_mode(l.mode())?;
            }
            let factors: Vec<Factor> = ladders.iter().map(|&l| l.into()).collect();
            let mut occ = vec![0u32; basis.modes()];
            if let Some(amp) = apply_factors(basis.kind(), &mut occ, &factors) {
                let i = basis
                    .index_of(&occ)
                    .ok_or_else(|| Error::SectorViolation(format!("{ladders:?} leaves the basis sector")))?;
                s.amplitudes[i] += coefficient * amp;
            }
        }
        Ok(s)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn amplitude(&self, occupations: &[u32]) -> Complex64 {
        self.basis
            .index_of(occupations)
            .map(|i| self.amplitudes[i])
            .unwrap_or(ZERO)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        Ok(Self {
            basis: Arc::clone(&self.basis),
            amplitudes: self.amplitudes.unscale(n),
        })
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|<self|other>|^2` for normalized vectors.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}
