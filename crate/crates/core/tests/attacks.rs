use std::sync::{Arc, OnceLock};

use qsa::adversary::{
    attack_gamma_sq, estimate_challenge, AttackContext, AttackModel, Measurement,
};
use qsa::optics::{challenge_field, sample_key, BinaryPhaseChallenge, KeyModel, ScatteringKey};
use qsa::protocol::{enroll, Database};
use qsa::seeding::{rng_from_seed, stream};
use rayon::prelude::*;

fn setup() -> &'static (ScatteringKey, Database) {
    static SETUP: OnceLock<(ScatteringKey, Database)> = OnceLock::new();
    SETUP.get_or_init(|| {
        let key = sample_key(4096, 1024, KeyModel::HaarUnitary).unwrap();
        let db = enroll(&key, 400, 4097).unwrap();
        (key, db)
    })
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

/// E|C₀·Ĉ|² for a normalized heterodyne record, by quadrature of
/// `∫₀¹ e^{−nu} [(1−u)^{K−1} + n (1−u)^K] du` (Simpson).
fn heterodyne_overlap_oracle(modes: usize, photons: f64) -> f64 {
    let f = |u: f64| {
        let v = 1.0 - u;
        (-photons * u).exp() * (v.powi(modes as i32 - 1) + photons * v.powi(modes as i32))
    };
    let steps = 20_000;
    let h = 1.0 / steps as f64;
    let mut sum = f(0.0) + f(1.0);
    for i in 1..steps {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    sum * h / 3.0
}

fn heterodyne_overlaps(modes: usize, photons: f64, trials: u64, seed: u64) -> Vec<f64> {
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let c = challenge_field(&BinaryPhaseChallenge::random(modes, &mut rng).unwrap());
            estimate_challenge(&c, photons, &mut rng)
                .unwrap()
                .overlap_sq
        })
        .collect()
}

#[test]
fn quadrature_oracle_limits() {
    assert!((heterodyne_overlap_oracle(1, 3.0) - 1.0).abs() < 1e-9);
    // Large K and n: the ratio n/(n+K).
    let v = heterodyne_overlap_oracle(1024, 256.0);
    assert!((v - 0.2).abs() < 2e-3, "{v}");
}

#[test]
fn heterodyne_overlap_matches_quadrature_oracle() {
    for (modes, photons) in [(1usize, 0.5), (4, 3.0), (16, 8.0), (64, 64.0), (256, 32.0)] {
        let xs = heterodyne_overlaps(modes, photons, 20_000, modes as u64);
        let (m, se) = mean_se(&xs);
        let expected = heterodyne_overlap_oracle(modes, photons);
        assert!(
            (m - expected).abs() < 4.0 * se.max(1e-12),
            "K={modes} n={photons}: {m} vs {expected} (se {se})"
        );
    }
}

#[test]
fn heterodyne_overlap_at_s_four() {
    let xs = heterodyne_overlaps(1024, 256.0, 10_000, 77);
    let (m, _) = mean_se(&xs);
    assert!((m - 0.2).abs() < 0.005, "{m}");
}

#[test]
fn estimation_attack_follows_one_over_s_plus_one() {
    let (key, db) = setup();
    let true_mean = db.mean_expected_gamma_sq();
    let model = AttackModel::estimation(Measurement::HeterodyneSimulated);
    for s in [1.0, 2.0, 4.0, 8.0] {
        let ctx = AttackContext {
            key,
            photons: 1024.0 / s,
        };
        let xs: Vec<f64> = (0..800u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(s as u64, i);
                attack_gamma_sq(&model, &db.records()[i as usize % db.len()], &ctx, &mut rng)
                    .unwrap()
            })
            .collect();
        let ratio = mean_se(&xs).0 / true_mean;
        let expected = 1.0 / (s + 1.0);
        assert!(
            (ratio / expected - 1.0).abs() < 0.1,
            "S={s}: {ratio} vs {expected}"
        );
    }
}

#[test]
fn simulated_estimator_gamma_tracks_overlap() {
    // gamma_sq / |γ_OK|² equals the estimate's overlap on average.
    let (key, db) = setup();
    let photons = 256.0;
    let pairs: Vec<(f64, f64)> = (0..600u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(31, i);
            let rec = &db.records()[i as usize % db.len()];
            let c = challenge_field(&rec.challenge);
            let est = estimate_challenge(&c, photons, &mut rng).unwrap();
            let emulated = qsa::optics::propagate(key, &est.estimated_challenge).unwrap();
            let masked = qsa::optics::apply_mask(&rec.decode_mask, &emulated).unwrap();
            let gamma = qsa::optics::pinhole_power(&masked).gamma_sq;
            (gamma / rec.expected_gamma_sq, est.overlap_sq)
        })
        .collect();
    let diffs: Vec<f64> = pairs.iter().map(|(g, o)| g - o).collect();
    let (m, se) = mean_se(&diffs);
    assert!(m.abs() < 4.0 * se, "{m} ± {se}");
}

#[test]
fn random_key_and_random_challenge_both_give_one_over_k() {
    let (key, db) = setup();
    let other = AttackModel::RandomKey(Arc::new(
        sample_key(5, 1024, KeyModel::HaarUnitary).unwrap(),
    ));
    let ctx = AttackContext {
        key,
        photons: 230.0,
    };
    for model in [other, AttackModel::RandomChallenge] {
        let xs: Vec<f64> = (0..4000u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(55, i);
                attack_gamma_sq(&model, &db.records()[i as usize % db.len()], &ctx, &mut rng)
                    .unwrap()
            })
            .collect();
        let (m, se) = mean_se(&xs);
        assert!(
            (m - 1.0 / 1024.0).abs() < 3.0 * se,
            "{}: {m} ± {se}",
            model.label()
        );
    }
}

#[test]
fn hybrid_pre_transform_does_not_beat_plain_estimation() {
    let (key, db) = setup();
    let basis = Arc::new(sample_key(6, 1024, KeyModel::HaarUnitary).unwrap());
    let ctx = AttackContext {
        key,
        photons: 256.0,
    };
    let run = |model: &AttackModel, seed: u64| {
        let xs: Vec<f64> = (0..500u64)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(seed, i);
                attack_gamma_sq(model, &db.records()[i as usize % db.len()], &ctx, &mut rng)
                    .unwrap()
            })
            .collect();
        mean_se(&xs)
    };
    let (plain, se_p) = run(
        &AttackModel::estimation(Measurement::HeterodyneSimulated),
        61,
    );
    let hybrid = AttackModel::ChallengeEstimation {
        measurement: Measurement::HeterodyneSimulated,
        pre_transform: Some(basis),
    };
    let (h, se_h) = run(&hybrid, 62);
    assert!(
        h <= plain + 3.0 * (se_p.hypot(se_h)),
        "hybrid {h} vs plain {plain}"
    );
}

#[test]
fn analytic_bound_reference_attack_mean() {
    // |γ_OK|² giving a 4.3 true-key mean at S = 4 gives 0.86 for the attack.
    let modes = 1024;
    let photons = 256.0;
    let (key, db) = setup();
    let rec = &db.records()[0];
    let eta = 4.3 / (photons * rec.expected_gamma_sq);
    let ctx = AttackContext { key, photons };
    let g = attack_gamma_sq(
        &AttackModel::estimation(Measurement::AnalyticBound),
        rec,
        &ctx,
        &mut rng_from_seed(0),
    )
    .unwrap();
    assert_eq!(modes as f64 / photons, 4.0);
    assert!((photons * eta * g - 0.86).abs() < 1e-12);
}
