use std::f64::consts::TAU;

use num_complex::Complex64;
use proptest::prelude::*;
use qsa::optics::{
    apply_mask, challenge_field, conjugate_mask, focus_overlap, propagate, sample_key,
    BinaryPhaseChallenge, KeyModel, ModeField, PhaseMask,
};
use qsa::protocol::{enroll, Database};

fn unit_field(parts: &[(f64, f64)]) -> ModeField {
    ModeField::unit(
        parts
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect(),
    )
    .unwrap()
}

fn nonzero_parts(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..max).prop_filter("non-zero", |v| {
        v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3)
    })
}

proptest! {
    #[test]
    fn challenge_fields_are_signed_flat(bits in prop::collection::vec(any::<bool>(), 1..200)) {
        let k = bits.len();
        let c = BinaryPhaseChallenge::new(bits.clone()).unwrap();
        let f = challenge_field(&c);
        prop_assert_eq!(f.modes(), k);
        let a = 1.0 / (k as f64).sqrt();
        for (bit, amp) in bits.iter().zip(f.amplitudes()) {
            let want = if *bit { -a } else { a };
            prop_assert!((amp.re - want).abs() < 1e-15 && amp.im == 0.0);
        }
        prop_assert!((f.norm_sqr() - 1.0).abs() < 1e-12);
        prop_assert_eq!(BinaryPhaseChallenge::from_bit_string(&c.to_bit_string()).unwrap(), c);
    }

    #[test]
    fn masks_are_isometries(parts in nonzero_parts(64), seed in any::<u64>()) {
        let f = unit_field(&parts);
        let mut rng = qsa::seeding::rng_from_seed(seed);
        let m = PhaseMask::random(f.modes(), &mut rng).unwrap();
        let out = apply_mask(&m, &f).unwrap();
        prop_assert!((out.norm_sqr() - f.norm_sqr()).abs() < 1e-12);
    }

    #[test]
    fn double_mask_equals_doubled_phase(phases in prop::collection::vec(0.0f64..TAU, 1..32), parts in nonzero_parts(32)) {
        let k = phases.len().min(parts.len());
        let f = unit_field(&parts[..k]);
        let m = PhaseMask::new(phases[..k].to_vec()).unwrap();
        let twice = apply_mask(&m, &apply_mask(&m, &f).unwrap()).unwrap();
        let doubled = PhaseMask::new(phases[..k].iter().map(|p| 2.0 * p).collect()).unwrap();
        let once = apply_mask(&doubled, &f).unwrap();
        for (a, b) in twice.amplitudes().iter().zip(once.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        let composed = apply_mask(&m.compose(&m).unwrap(), &f).unwrap();
        for (a, b) in composed.amplitudes().iter().zip(once.amplitudes()) {
            prop_assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn conjugation_makes_field_real_non_negative(parts in nonzero_parts(64)) {
        let f = unit_field(&parts);
        let out = apply_mask(&conjugate_mask(&f), &f).unwrap();
        for a in out.amplitudes() {
            prop_assert!(a.im.abs() < 1e-12 && a.re > -1e-12);
        }
    }

    #[test]
    fn focus_fractions_sum_to_one(parts in nonzero_parts(64)) {
        let r = focus_overlap(&unit_field(&parts)).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&r.gamma_sq));
        prop_assert!((r.gamma_sq + r.out_of_pinhole - 1.0).abs() < 1e-9);
    }

    #[test]
    fn haar_keys_preserve_norm(seed in any::<u64>(), parts in nonzero_parts(24)) {
        let f = unit_field(&parts);
        let key = sample_key(seed, f.modes(), KeyModel::HaarUnitary).unwrap();
        prop_assert!(key.matrix().unitarity_error() < 1e-6);
        prop_assert!((propagate(&key, &f).unwrap().norm_sqr() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn database_round_trip_is_exact(seed in any::<u64>(), modes in 1usize..24, count in 1usize..6) {
        let key = sample_key(seed, modes, KeyModel::ComplexGaussian).unwrap();
        let db = enroll(&key, count, seed ^ 1).unwrap();
        let back = Database::from_json(&db.to_json()).unwrap();
        prop_assert_eq!(&back, &db);
        prop_assert_eq!(back.to_json(), db.to_json());
    }
}
