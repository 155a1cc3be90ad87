use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use epart::cli::format_value;
use epart::fock::{enumerate_basis, Bipartition, DensityMatrix, ParticleKind, StateVector};
use epart::linalg::CVector;
use epart::measures::entanglement_of_particles;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_values_keep_twelve_digits(x in -1e6f64..1e6) {
        let back: f64 = format_value(x).parse().unwrap();
        prop_assert!((back - x).abs() <= 5e-12 * x.abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn entanglement_of_particles_is_a_weighted_sum(
        amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6),
        pick in 0usize..3,
    ) {
        // two spinless fermions in four modes
        let basis = Arc::new(enumerate_basis(ParticleKind::Fermion, 4, Some(2)).unwrap());
        let v = CVector::from_iterator(6, amps.iter().map(|&(a, b)| Complex64::new(a, b)));
        prop_assume!(v.norm() > 1e-3);
        let psi = StateVector::new(&basis, v).unwrap().normalized().unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let p = &Bipartition::all_complete(4)[pick];
        let report = entanglement_of_particles(&rho, p).unwrap();
        prop_assert_eq!(report.total, report.recomputed_total());
        let weight: f64 = report.sectors.iter().map(|s| s.weight).sum();
        prop_assert!((weight - 1.0).abs() < 1e-12);
        prop_assert!(report.sectors.iter().all(|s| s.entanglement >= 0.0 && s.entanglement <= 1.0 + 1e-12));
    }
}
