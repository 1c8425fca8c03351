//! Enrollment, single-round Poisson readout, and multi-round authentication
//! with fake challenges and an out-of-pinhole monitor.

mod database;

use rand::Rng;
use serde::Serialize;

pub use database::{ChallengeResponseRecord, Database, DATABASE_FORMAT, DATABASE_VERSION};

use crate::adversary::{
    attack_gamma_sq, fake_gamma_sq, flood_detectors, AttackContext, AttackModel,
};
use crate::error::{QsaError, Result};
use crate::optics::{
    apply_mask, challenge_field, conjugate_mask, expected_conjugation_efficiency, pinhole_power,
    propagate_many, BinaryPhaseChallenge, PhaseMask, ScatteringKey,
};
use crate::seeding::rng_from_seed;
use crate::stats::{optimal_threshold, poisson_quantile, sample_poisson};

/// Mean photodetections per true-key round reported for the reference setup.
pub const REFERENCE_TRUE_KEY_MEAN: f64 = 4.3;
/// Mean photon number per challenge pulse of the reference setup.
pub const REFERENCE_PHOTONS: f64 = 230.0;
/// Controlled mode count of the reference setup.
pub const REFERENCE_MODES: usize = 1100;
/// Mode count of the repetition sweep.
pub const SWEEP_MODES: usize = 1062;
/// Quantile of the expected fake-round count above which flooding is flagged.
pub const FAKE_ALARM_QUANTILE: f64 = 0.999;

/// `S = K / n`.
pub fn security_parameter(modes: usize, photons: f64) -> Result<f64> {
    if !photons.is_finite() || photons <= 0.0 {
        return Err(QsaError::invalid(
            "photons",
            format!("{photons} must be positive"),
        ));
    }
    Ok(modes as f64 / photons)
}

/// Size of the binary challenge space, `2^segments`, as its base-10 logarithm.
pub fn challenge_space_log10(segments: u32) -> f64 {
    segments as f64 * std::f64::consts::LOG10_2
}

/// `2^segments` exactly, or `None` when it does not fit in 128 bits.
pub fn challenge_space_size(segments: u32) -> Option<u128> {
    1u128.checked_shl(segments)
}

/// Detection efficiency that makes the mean true-key count `target_mean` for
/// `photons`-photon challenges over `modes` modes under phase-only decoding.
pub fn calibrated_eta(modes: usize, photons: f64, target_mean: f64) -> f64 {
    target_mean / (photons * expected_conjugation_efficiency(modes))
}

/// Efficiency reproducing a 4.3-count true-key mean at n = 230, K = 1100.
pub fn reference_eta() -> f64 {
    calibrated_eta(REFERENCE_MODES, REFERENCE_PHOTONS, REFERENCE_TRUE_KEY_MEAN)
}

/// Verifier configuration for one authentication session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierParams {
    /// Mean photon number per challenge pulse.
    pub photons: f64,
    /// Overall detection efficiency of the pinhole channel.
    pub eta: f64,
    /// Combined threshold on the summed counts of the real rounds.
    pub threshold: u64,
    /// Number of real (non-fake) rounds per session.
    pub rounds: u32,
    /// Probability that any given slot of the session is a fake challenge.
    pub fake_challenge_fraction: f64,
    /// Counts tolerated above the 99.9 % quantile of the fake-round total.
    pub fake_alarm_limit: u64,
    /// Efficiency of the out-of-pinhole monitor relative to `eta`.
    pub monitor_efficiency: f64,
    /// Monitor alarm when its total exceeds this multiple of the expected
    /// out-of-pinhole mean; `None` disables the monitor.
    pub monitor_alarm_factor: Option<f64>,
    /// Additive dark-count mean per detector per round.
    pub dark_count_mean: f64,
    /// Per-round saturation of each detector (dead-time model).
    pub saturation: Option<u64>,
}

impl Default for VerifierParams {
    /// Reference calibration: n = 230, calibrated eta, ten rounds, threshold at
    /// the optimum against the analytic estimation bound for K = 1100.
    fn default() -> Self {
        let eta = reference_eta();
        let mut p = VerifierParams {
            photons: REFERENCE_PHOTONS,
            eta,
            threshold: 0,
            rounds: 10,
            fake_challenge_fraction: 0.1,
            fake_alarm_limit: 0,
            monitor_efficiency: 1.0,
            monitor_alarm_factor: Some(3.0),
            dark_count_mean: 0.0,
            saturation: None,
        };
        p.threshold = p
            .auto_threshold(
                REFERENCE_MODES,
                expected_conjugation_efficiency(REFERENCE_MODES),
            )
            .expect("reference calibration separates true key from attack");
        p
    }
}

impl VerifierParams {
    pub fn validate(&self) -> Result<()> {
        if !self.photons.is_finite() || self.photons <= 0.0 {
            return Err(QsaError::invalid("photons", format!("{}", self.photons)));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(QsaError::invalid(
                "eta",
                format!("{} not in [0, 1]", self.eta),
            ));
        }
        if self.rounds == 0 {
            return Err(QsaError::invalid("rounds", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.fake_challenge_fraction) {
            return Err(QsaError::invalid(
                "fake_challenge_fraction",
                format!("{} not in [0, 1)", self.fake_challenge_fraction),
            ));
        }
        if !self.monitor_efficiency.is_finite() || self.monitor_efficiency < 0.0 {
            return Err(QsaError::invalid(
                "monitor_efficiency",
                format!("{}", self.monitor_efficiency),
            ));
        }
        if let Some(f) = self.monitor_alarm_factor {
            if !f.is_finite() || f <= 0.0 {
                return Err(QsaError::invalid("monitor_alarm_factor", format!("{f}")));
            }
        }
        if !self.dark_count_mean.is_finite() || self.dark_count_mean < 0.0 {
            return Err(QsaError::invalid(
                "dark_count_mean",
                format!("{}", self.dark_count_mean),
            ));
        }
        // The threshold must be attainable by an honest key: within the
        // 1 − 1e-15 quantile of the count total at full pinhole coupling.
        let full = self.rounds as f64 * (self.photons * self.eta + self.dark_count_mean);
        let mut bound = poisson_quantile(full, 1.0 - 1e-15)?;
        if let Some(sat) = self.saturation {
            bound = bound.min(sat.saturating_mul(self.rounds as u64));
        }
        if self.threshold > bound.max(1) {
            return Err(QsaError::invalid(
                "threshold",
                format!("{} is unreachable (count bound {bound})", self.threshold),
            ));
        }
        Ok(())
    }

    /// Optimal combined threshold against the analytic estimation bound, for a
    /// database whose mean true-key pinhole fraction is `mean_gamma_ok`.
    pub fn auto_threshold(&self, modes: usize, mean_gamma_ok: f64) -> Result<u64> {
        let s = security_parameter(modes, self.photons)?;
        let mu_true = self.photons * self.eta * mean_gamma_ok + self.dark_count_mean;
        let mu_attack = self.photons * self.eta * mean_gamma_ok / (s + 1.0) + self.dark_count_mean;
        optimal_threshold(mu_true, mu_attack, self.rounds)
    }

    fn pinhole_mean(&self, gamma_sq: f64) -> f64 {
        self.photons * self.eta * gamma_sq + self.dark_count_mean
    }

    fn monitor_mean(&self, gamma_sq: f64) -> f64 {
        self.photons * self.eta * self.monitor_efficiency * (1.0 - gamma_sq).max(0.0)
            + self.dark_count_mean
    }

    fn saturate(&self, counts: u64) -> u64 {
        self.saturation.map_or(counts, |s| counts.min(s))
    }
}

/// Detector outcome of one challenge pulse.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundResult {
    /// Poisson mean at the pinhole detector, excluding any flood.
    pub mu_pinhole: f64,
    pub counts: u64,
    /// Poisson mean at the out-of-pinhole monitor, excluding any flood.
    pub mu_monitor: f64,
    pub monitor_counts: u64,
    pub was_fake: bool,
    /// Database record used (real rounds only).
    pub record_index: Option<usize>,
}

/// Outcome of a multi-round authentication session.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decision {
    /// Sum of pinhole counts over the real rounds.
    pub total_counts: u64,
    pub threshold: u64,
    pub accepted: bool,
    pub blinding_alarm: bool,
    pub fake_alarm: bool,
    pub monitor_alarm: bool,
    pub real_rounds: u32,
    pub fake_rounds: u32,
    pub per_round: Vec<RoundResult>,
}

/// The object in the verifier's reader: the enrolled key's physics plus what
/// actually answers the challenges.
#[derive(Debug, Clone, Copy)]
pub struct Responder<'a> {
    pub key: &'a ScatteringKey,
    pub attack: &'a AttackModel,
}

impl<'a> Responder<'a> {
    pub fn new(key: &'a ScatteringKey, attack: &'a AttackModel) -> Self {
        Responder { key, attack }
    }

    fn context(&self, params: &VerifierParams) -> AttackContext<'a> {
        AttackContext {
            key: self.key,
            photons: params.photons,
        }
    }
}

/// Measures `count` random challenge-response pairs of `key` with unlimited
/// light. Decode masks are stored on the 16-bit phase grid, and each record's
/// expected pinhole fraction is evaluated with that quantized mask.
pub fn enroll(key: &ScatteringKey, count: usize, rng_seed: u64) -> Result<Database> {
    if count == 0 {
        return Err(QsaError::invalid("count", "must be at least 1"));
    }
    let modes = key.modes();
    let mut rng = rng_from_seed(rng_seed);
    let challenges = (0..count)
        .map(|_| BinaryPhaseChallenge::random(modes, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let fields: Vec<_> = challenges.iter().map(challenge_field).collect();
    let responses = propagate_many(key, &fields)?;
    let records = challenges
        .into_iter()
        .zip(responses)
        .map(|(challenge, response)| {
            let decode_mask = conjugate_mask(&response).quantized();
            let expected_gamma_sq = pinhole_power(&apply_mask(&decode_mask, &response)?).gamma_sq;
            Ok(ChallengeResponseRecord {
                challenge,
                decode_mask,
                expected_gamma_sq,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Database::new(key.id(), modes, records)
}

fn detect<R: Rng + ?Sized>(
    gamma_sq: f64,
    was_fake: bool,
    record_index: Option<usize>,
    responder: &Responder<'_>,
    params: &VerifierParams,
    rng: &mut R,
) -> Result<RoundResult> {
    let mu_pinhole = params.pinhole_mean(gamma_sq);
    let mu_monitor = params.monitor_mean(gamma_sq);
    let mut round = RoundResult {
        mu_pinhole,
        counts: sample_poisson(mu_pinhole, rng),
        mu_monitor,
        monitor_counts: sample_poisson(mu_monitor, rng),
        was_fake,
        record_index,
    };
    let flood = responder.attack.flood_mean();
    if flood > 0.0 {
        let geometry = responder.attack.flood_geometry(responder.key.modes());
        round = flood_detectors(round, flood, geometry, rng)?;
    }
    round.counts = params.saturate(round.counts);
    round.monitor_counts = params.saturate(round.monitor_counts);
    Ok(round)
}

/// One challenge pulse for an enrolled record.
pub fn run_round<R: Rng + ?Sized>(
    responder: &Responder<'_>,
    record: &ChallengeResponseRecord,
    params: &VerifierParams,
    rng: &mut R,
) -> Result<RoundResult> {
    run_indexed_round(responder, record, None, params, rng)
}

fn run_indexed_round<R: Rng + ?Sized>(
    responder: &Responder<'_>,
    record: &ChallengeResponseRecord,
    index: Option<usize>,
    params: &VerifierParams,
    rng: &mut R,
) -> Result<RoundResult> {
    let gamma_sq = attack_gamma_sq(responder.attack, record, &responder.context(params), rng)?;
    detect(gamma_sq, false, index, responder, params, rng)
}

/// A fake challenge: random binary challenge with a freshly random decode
/// mask, so the expected pinhole fraction is the random-overlap level `1/K`.
pub fn fake_record<R: Rng + ?Sized>(modes: usize, rng: &mut R) -> Result<ChallengeResponseRecord> {
    Ok(ChallengeResponseRecord {
        challenge: BinaryPhaseChallenge::random(modes, rng)?,
        decode_mask: PhaseMask::random(modes, rng)?,
        expected_gamma_sq: 1.0 / modes as f64,
    })
}

pub fn run_fake_round<R: Rng + ?Sized>(
    responder: &Responder<'_>,
    params: &VerifierParams,
    rng: &mut R,
) -> Result<RoundResult> {
    let fake = fake_record(responder.key.modes(), rng)?;
    let gamma_sq = fake_gamma_sq(responder.attack, &fake, &responder.context(params), rng)?;
    detect(gamma_sq, true, None, responder, params, rng)
}

/// Runs `params.rounds` real rounds on uniformly drawn records (with
/// replacement). Before every real round, slots are fake with probability
/// `fake_challenge_fraction`. Counts of real rounds are summed and compared
/// with the combined threshold; any alarm forces rejection.
pub fn authenticate<R: Rng + ?Sized>(
    responder: &Responder<'_>,
    database: &Database,
    params: &VerifierParams,
    rng: &mut R,
) -> Result<Decision> {
    params.validate()?;
    if database.is_empty() {
        return Err(QsaError::EmptyDatabase);
    }
    if database.modes() != responder.key.modes() {
        return Err(QsaError::DimensionMismatch {
            expected: database.modes(),
            found: responder.key.modes(),
        });
    }
    let modes = database.modes();
    let mut per_round = Vec::with_capacity(params.rounds as usize);
    let mut real_rounds = 0;
    while real_rounds < params.rounds {
        if params.fake_challenge_fraction > 0.0
            && rng.random::<f64>() < params.fake_challenge_fraction
        {
            per_round.push(run_fake_round(responder, params, rng)?);
            continue;
        }
        let index = rng.random_range(0..database.len());
        let record = &database.records()[index];
        per_round.push(run_indexed_round(
            responder,
            record,
            Some(index),
            params,
            rng,
        )?);
        real_rounds += 1;
    }

    let total_counts: u64 = per_round
        .iter()
        .filter(|r| !r.was_fake)
        .map(|r| r.counts)
        .sum();
    let fake_rounds = per_round.iter().filter(|r| r.was_fake).count() as u32;

    let fake_total: u64 = per_round
        .iter()
        .filter(|r| r.was_fake)
        .map(|r| r.counts)
        .sum();
    let fake_expected = fake_rounds as f64 * params.pinhole_mean(1.0 / modes as f64);
    let fake_alarm = fake_rounds > 0
        && fake_total
            > poisson_quantile(fake_expected, FAKE_ALARM_QUANTILE)? + params.fake_alarm_limit;

    let monitor_alarm = match params.monitor_alarm_factor {
        Some(factor) => {
            let expected: f64 = per_round
                .iter()
                .map(|r| {
                    let gamma = match r.record_index {
                        Some(i) => database.records()[i].expected_gamma_sq,
                        None => 1.0 / modes as f64,
                    };
                    params.monitor_mean(gamma)
                })
                .sum();
            let observed: u64 = per_round.iter().map(|r| r.monitor_counts).sum();
            observed as f64 > factor * expected
        }
        None => false,
    };

    let blinding_alarm = fake_alarm || monitor_alarm;
    Ok(Decision {
        total_counts,
        threshold: params.threshold,
        accepted: total_counts >= params.threshold && !blinding_alarm,
        blinding_alarm,
        fake_alarm,
        monitor_alarm,
        real_rounds,
        fake_rounds,
        per_round,
    })
}
