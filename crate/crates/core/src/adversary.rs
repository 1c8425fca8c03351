//! The attack catalog: what the verifier's pinhole sees when something other
//! than the enrolled key answers a challenge.
//!
//! Closed-form models ([`Measurement::AnalyticBound`], [`AttackModel::PartialEmulator`])
//! return mean pinhole fractions; the simulated models run the full optical
//! chain. Flooding is applied at detection time by [`flood_detectors`].

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{QsaError, Result};
use crate::optics::{
    apply_mask, challenge_field, decode_gamma_sq, inner_product, pinhole_power, propagate,
    propagate_adjoint, sample_key, BinaryPhaseChallenge, KeyModel, ModeField, ScatteringKey,
};
use crate::protocol::{ChallengeResponseRecord, RoundResult};
use crate::stats::sample_poisson;

/// Monitor-to-pinhole ratio of flood light that is not shaped to the decode
/// mask: it splits like any mismatched-mask field, `1/K` into the pinhole.
pub fn unshaped_flood_geometry(modes: usize) -> f64 {
    modes.saturating_sub(1) as f64
}

/// How a challenge-estimation adversary turns its measurement into a response.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measurement {
    /// Simulated simultaneous-quadrature measurement of every mode, followed by
    /// a perfect digital emulation of the key on the estimated challenge.
    HeterodyneSimulated,
    /// Mean pinhole fraction `|γ_OK|²/(S+1)`.
    AnalyticBound,
}

/// Who (or what) answers the verifier's challenges.
#[derive(Debug, Clone, PartialEq)]
pub enum AttackModel {
    /// The enrolled key itself.
    TrueKey,
    /// A different, independently manufactured key.
    RandomKey(Arc<ScatteringKey>),
    /// The true key illuminated with a random challenge instead of the enrolled one.
    RandomChallenge,
    /// Measure the challenge, then emulate the key on the estimate. An optional
    /// unitary is applied to the challenge before measurement (hybrid strategy).
    ChallengeEstimation {
        measurement: Measurement,
        pre_transform: Option<Arc<ScatteringKey>>,
    },
    /// Passive emulator holding a fraction `fraction` of the key's N² couplings.
    PartialEmulator { fraction: f64 },
    /// Floods both detectors while `inner` answers the challenge: Poisson light
    /// of mean `flood_mean` per round at the pinhole and `geometry` times that
    /// at the monitor (`None`: unshaped flood).
    Blinding {
        flood_mean: f64,
        geometry: Option<f64>,
        inner: Box<AttackModel>,
    },
}

impl AttackModel {
    pub fn random_key(seed: u64, modes: usize, model: KeyModel) -> Result<Self> {
        Ok(AttackModel::RandomKey(Arc::new(sample_key(
            seed, modes, model,
        )?)))
    }

    pub fn estimation(measurement: Measurement) -> Self {
        AttackModel::ChallengeEstimation {
            measurement,
            pre_transform: None,
        }
    }

    pub fn partial_emulator(fraction: f64) -> Result<Self> {
        let m = AttackModel::PartialEmulator { fraction };
        m.validate()?;
        Ok(m)
    }

    pub fn blinding(flood_mean: f64, inner: AttackModel) -> Result<Self> {
        Self::blinding_with_geometry(flood_mean, None, inner)
    }

    /// Blinding with an explicit monitor-to-pinhole flood ratio; small values
    /// model a flood focused onto the pinhole.
    pub fn blinding_with_geometry(
        flood_mean: f64,
        geometry: Option<f64>,
        inner: AttackModel,
    ) -> Result<Self> {
        let m = AttackModel::Blinding {
            flood_mean,
            geometry,
            inner: Box::new(inner),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AttackModel::PartialEmulator { fraction } => {
                if !(0.0..=1.0).contains(fraction) {
                    return Err(QsaError::invalid(
                        "fraction",
                        format!("{fraction} not in [0, 1]"),
                    ));
                }
            }
            AttackModel::Blinding {
                flood_mean,
                geometry,
                inner,
            } => {
                if !flood_mean.is_finite() || *flood_mean < 0.0 {
                    return Err(QsaError::invalid("flood_mean", format!("{flood_mean}")));
                }
                if let Some(g) = geometry {
                    if !g.is_finite() || *g < 0.0 {
                        return Err(QsaError::invalid("geometry", format!("{g}")));
                    }
                }
                if matches!(**inner, AttackModel::Blinding { .. }) {
                    return Err(QsaError::invalid(
                        "inner",
                        "blinding attacks cannot be nested",
                    ));
                }
                inner.validate()?;
            }
            _ => {}
        }
        Ok(())
    }

    /// Flood mean per round (zero unless blinding).
    pub fn flood_mean(&self) -> f64 {
        match self {
            AttackModel::Blinding { flood_mean, .. } => *flood_mean,
            _ => 0.0,
        }
    }

    /// Monitor-to-pinhole flood ratio at `modes` modes.
    pub fn flood_geometry(&self, modes: usize) -> f64 {
        match self {
            AttackModel::Blinding {
                geometry: Some(g), ..
            } => *g,
            _ => unshaped_flood_geometry(modes),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            AttackModel::TrueKey => "true-key",
            AttackModel::RandomKey(_) => "random-key",
            AttackModel::RandomChallenge => "random-challenge",
            AttackModel::ChallengeEstimation {
                measurement: Measurement::HeterodyneSimulated,
                ..
            } => "estimation-heterodyne",
            AttackModel::ChallengeEstimation {
                measurement: Measurement::AnalyticBound,
                ..
            } => "estimation-bound",
            AttackModel::PartialEmulator { .. } => "partial-emulator",
            AttackModel::Blinding { .. } => "blinding",
        }
    }
}

/// The adversary's estimate of a challenge and its fidelity.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimationOutcome {
    pub estimated_challenge: ModeField,
    /// `|C₀ · Ĉ|²`.
    pub overlap_sq: f64,
}

/// What the simulation knows besides the attack: the enrolled key (which a
/// challenge-estimation adversary is assumed to have fully characterized) and
/// the photon budget of a challenge pulse.
#[derive(Debug, Clone, Copy)]
pub struct AttackContext<'a> {
    pub key: &'a ScatteringKey,
    pub photons: f64,
}

impl AttackContext<'_> {
    /// `S = K / n`.
    pub fn security_parameter(&self) -> f64 {
        self.key.modes() as f64 / self.photons
    }
}

fn check_photons(photons: f64) -> Result<()> {
    if !photons.is_finite() || photons <= 0.0 {
        return Err(QsaError::invalid(
            "photons",
            format!("{photons} must be positive"),
        ));
    }
    Ok(())
}

/// Heterodyne estimate of a coherent challenge carrying `photons` photons.
///
/// Each mode yields `√n·cᵢ` plus circular complex Gaussian noise of total
/// variance one photon; the normalized record is the estimate.
pub fn estimate_challenge<R: Rng + ?Sized>(
    true_challenge: &ModeField,
    photons: f64,
    rng: &mut R,
) -> Result<EstimationOutcome> {
    check_photons(photons)?;
    if !true_challenge.is_normalized() {
        return Err(QsaError::NotNormalized {
            norm_sq: true_challenge.norm_sqr(),
        });
    }
    let observed = heterodyne(true_challenge.amplitudes(), photons, rng);
    outcome(true_challenge, observed)
}

/// As [`estimate_challenge`], but the adversary first sends the challenge
/// through the unitary `basis`, measures, and maps the record back.
pub fn estimate_challenge_in_basis<R: Rng + ?Sized>(
    true_challenge: &ModeField,
    photons: f64,
    basis: &ScatteringKey,
    rng: &mut R,
) -> Result<EstimationOutcome> {
    check_photons(photons)?;
    if !true_challenge.is_normalized() {
        return Err(QsaError::NotNormalized {
            norm_sq: true_challenge.norm_sqr(),
        });
    }
    let transformed = propagate(basis, true_challenge)?;
    let observed = heterodyne(transformed.amplitudes(), photons, rng);
    let back = propagate_adjoint(basis, &ModeField::new(observed)?)?;
    outcome(true_challenge, back.into_amplitudes())
}

fn heterodyne<R: Rng + ?Sized>(
    amplitudes: &[Complex64],
    photons: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let scale = photons.sqrt();
    let sigma = std::f64::consts::FRAC_1_SQRT_2;
    amplitudes
        .iter()
        .map(|c| {
            let noise = Complex64::new(
                sigma * rng.sample::<f64, _>(StandardNormal),
                sigma * rng.sample::<f64, _>(StandardNormal),
            );
            c * scale + noise
        })
        .collect()
}

fn outcome(true_challenge: &ModeField, observed: Vec<Complex64>) -> Result<EstimationOutcome> {
    let estimated_challenge = ModeField::unit(observed)?;
    let overlap_sq = inner_product(true_challenge, &estimated_challenge)?
        .norm_sqr()
        .min(1.0);
    Ok(EstimationOutcome {
        estimated_challenge,
        overlap_sq,
    })
}

/// Mean relative pinhole fraction of a passive emulator with a fraction `F` of
/// the key's couplings, `F + (F − 1)/(S + 1)`, clamped to `[0, 1]`.
pub fn partial_emulator_factor(fraction: f64, security_parameter: f64) -> f64 {
    (fraction + (fraction - 1.0) / (security_parameter + 1.0)).clamp(0.0, 1.0)
}

/// Pinhole fraction produced by `model` on an enrolled challenge.
pub fn attack_gamma_sq<R: Rng + ?Sized>(
    model: &AttackModel,
    record: &ChallengeResponseRecord,
    ctx: &AttackContext<'_>,
    rng: &mut R,
) -> Result<f64> {
    response_gamma_sq(model, record, false, ctx, rng)
}

/// Pinhole fraction produced by `model` on a fake challenge, whose decode mask
/// is unrelated to the key. Closed-form models return the random-overlap level
/// `1/K` there, since no signal is expected whatever the responder does.
pub fn fake_gamma_sq<R: Rng + ?Sized>(
    model: &AttackModel,
    fake: &ChallengeResponseRecord,
    ctx: &AttackContext<'_>,
    rng: &mut R,
) -> Result<f64> {
    response_gamma_sq(model, fake, true, ctx, rng)
}

fn response_gamma_sq<R: Rng + ?Sized>(
    model: &AttackModel,
    record: &ChallengeResponseRecord,
    fake: bool,
    ctx: &AttackContext<'_>,
    rng: &mut R,
) -> Result<f64> {
    model.validate()?;
    check_photons(ctx.photons)?;
    let modes = ctx.key.modes();
    if record.modes() != modes {
        return Err(QsaError::DimensionMismatch {
            expected: modes,
            found: record.modes(),
        });
    }
    let random_overlap = 1.0 / modes as f64;
    let challenge = challenge_field(&record.challenge);
    match model {
        AttackModel::TrueKey => decode_gamma_sq(ctx.key, &challenge, &record.decode_mask),
        AttackModel::RandomKey(other) => {
            if other.modes() != modes {
                return Err(QsaError::DimensionMismatch {
                    expected: modes,
                    found: other.modes(),
                });
            }
            decode_gamma_sq(other, &challenge, &record.decode_mask)
        }
        AttackModel::RandomChallenge => {
            let substitute = challenge_field(&BinaryPhaseChallenge::random(modes, rng)?);
            decode_gamma_sq(ctx.key, &substitute, &record.decode_mask)
        }
        AttackModel::ChallengeEstimation {
            measurement: Measurement::HeterodyneSimulated,
            pre_transform,
        } => {
            let estimate = match pre_transform {
                Some(basis) => estimate_challenge_in_basis(&challenge, ctx.photons, basis, rng)?,
                None => estimate_challenge(&challenge, ctx.photons, rng)?,
            };
            let emulated = propagate(ctx.key, &estimate.estimated_challenge)?;
            Ok(pinhole_power(&apply_mask(&record.decode_mask, &emulated)?).gamma_sq)
        }
        AttackModel::ChallengeEstimation {
            measurement: Measurement::AnalyticBound,
            ..
        } => Ok(if fake {
            random_overlap
        } else {
            record.expected_gamma_sq / (ctx.security_parameter() + 1.0)
        }),
        AttackModel::PartialEmulator { fraction } => Ok(if fake {
            random_overlap
        } else {
            record.expected_gamma_sq * partial_emulator_factor(*fraction, ctx.security_parameter())
        }),
        AttackModel::Blinding { inner, .. } => response_gamma_sq(inner, record, fake, ctx, rng),
    }
}

/// Adds flood light to a detected round: Poisson(`flood_mean`) on the pinhole
/// detector and Poisson(`flood_mean · geometry`) on the monitor. Fake rounds
/// are flooded like real ones.
pub fn flood_detectors<R: Rng + ?Sized>(
    mut round: RoundResult,
    flood_mean: f64,
    geometry: f64,
    rng: &mut R,
) -> Result<RoundResult> {
    if !flood_mean.is_finite() || flood_mean < 0.0 {
        return Err(QsaError::invalid("flood_mean", format!("{flood_mean}")));
    }
    if flood_mean == 0.0 {
        return Ok(round);
    }
    round.counts += sample_poisson(flood_mean, rng);
    round.monitor_counts += sample_poisson(flood_mean * geometry, rng);
    Ok(round)
}
