mod common;

use common::*;
use mlz::families::{build_two_band, two_band_residuals};
use mlz::semiclassics::{build_diagram, scattering_product, semiclassical_matrix};
use mlz::{lz_probability, MlzModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn two_band_matrix_structure(seed in any::<u64>(), n in 4usize..=9) {
        let spec = random_two_band(&mut ChaCha8Rng::seed_from_u64(seed), n);
        let m = build_two_band(&spec).unwrap();
        prop_assert!(two_band_residuals(&m).unwrap().passes(1e-10));
        let d = build_diagram(&m).unwrap();
        let sc = semiclassical_matrix(&d).unwrap();
        prop_assert!(sc.stochastic_error() < 1e-12);
        prop_assert!(sc.asymmetry() < 1e-12);
        prop_assert!(sc.max_abs_diff(&scattering_product(&d).unwrap()) < 1e-12);
        prop_assert!(sc.0.iter().all(|&p| (-1e-15..=1.0 + 1e-12).contains(&p)));
    }

    #[test]
    fn uniform_offset_shift_changes_nothing(seed in any::<u64>(), shift in -5.0f64..5.0, dt in -2.0f64..2.0) {
        let spec = random_two_band(&mut ChaCha8Rng::seed_from_u64(seed), 6);
        let m = build_two_band(&spec).unwrap();
        // E -> E + c and t -> t + dt keep every transition probability
        let offsets: Vec<f64> = (0..m.n()).map(|a| m.offsets()[a] + shift + m.slopes()[a] * dt).collect();
        let moved = MlzModel::new(m.slopes().to_vec(), offsets, m.couplings().clone()).unwrap();
        let p = semiclassical_matrix(&build_diagram(&m).unwrap()).unwrap();
        let q = semiclassical_matrix(&build_diagram(&moved).unwrap()).unwrap();
        prop_assert!(p.max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn lz_probability_bounds(g in 0.0f64..3.0, b1 in -5.0f64..5.0, db in 0.1f64..5.0) {
        let p = lz_probability(g, b1, b1 + db).unwrap();
        prop_assert!(p > 0.0 && p <= 1.0);
        let q = lz_probability(g * 1.1 + 1e-3, b1, b1 + db).unwrap();
        prop_assert!(q < p);
        prop_assert_eq!(p, lz_probability(-g, b1 + db, b1).unwrap());
    }
}
