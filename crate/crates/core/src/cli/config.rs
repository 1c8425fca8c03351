use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::adversary::{AttackModel, Measurement};
use crate::error::{QsaError, Result};
use crate::optics::KeyModel;
use crate::protocol::{reference_eta, REFERENCE_MODES, REFERENCE_PHOTONS, SWEEP_MODES};
use crate::stats::{default_rounds_values, default_s_values};

/// Responder selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AttackKind {
    #[default]
    TrueKey,
    RandomKey,
    RandomChallenge,
    EstimationHeterodyne,
    EstimationBound,
    PartialEmulator,
    Blinding,
}

impl AttackKind {
    pub const ALL: [AttackKind; 7] = [
        AttackKind::TrueKey,
        AttackKind::RandomKey,
        AttackKind::RandomChallenge,
        AttackKind::EstimationHeterodyne,
        AttackKind::EstimationBound,
        AttackKind::PartialEmulator,
        AttackKind::Blinding,
    ];

    fn name(self) -> &'static str {
        match self {
            AttackKind::TrueKey => "true-key",
            AttackKind::RandomKey => "random-key",
            AttackKind::RandomChallenge => "random-challenge",
            AttackKind::EstimationHeterodyne => "estimation-heterodyne",
            AttackKind::EstimationBound => "estimation-bound",
            AttackKind::PartialEmulator => "partial-emulator",
            AttackKind::Blinding => "blinding",
        }
    }
}

impl fmt::Display for AttackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackKind {
    type Err = QsaError;

    fn from_str(s: &str) -> Result<Self> {
        AttackKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| QsaError::invalid("attack", format!("unknown attack {s:?}")))
    }
}

/// Combined threshold: a fixed count or the optimum against the estimation bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "ThresholdRepr", into = "ThresholdRepr")]
pub enum Threshold {
    #[default]
    Auto,
    Fixed(u64),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ThresholdRepr {
    Count(u64),
    Text(String),
}

impl TryFrom<ThresholdRepr> for Threshold {
    type Error = QsaError;

    fn try_from(r: ThresholdRepr) -> Result<Self> {
        match r {
            ThresholdRepr::Count(c) => Ok(Threshold::Fixed(c)),
            ThresholdRepr::Text(t) => t.parse(),
        }
    }
}

impl From<Threshold> for ThresholdRepr {
    fn from(t: Threshold) -> Self {
        match t {
            Threshold::Auto => ThresholdRepr::Text("auto".into()),
            Threshold::Fixed(c) => ThresholdRepr::Count(c),
        }
    }
}

impl FromStr for Threshold {
    type Err = QsaError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(Threshold::Auto);
        }
        s.parse().map(Threshold::Fixed).map_err(|_| {
            QsaError::invalid(
                "threshold",
                format!("{s:?} is neither \"auto\" nor a count"),
            )
        })
    }
}

/// Every knob of an experiment. Defaults reproduce the reference calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub modes: usize,
    pub photons: f64,
    pub eta: f64,
    pub key_seed: u64,
    pub key_model: KeyModel,
    /// Records to enroll.
    pub records: usize,
    pub attack: AttackKind,
    pub random_key_seed: u64,
    pub emulator_fraction: f64,
    pub flood_mean: f64,
    /// Monitor-to-pinhole flood ratio; absent means an unshaped flood.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flood_geometry: Option<f64>,
    pub blinding_inner: AttackKind,
    pub rounds: u32,
    pub threshold: Threshold,
    pub fake_fraction: f64,
    pub fake_alarm_limit: u64,
    /// Zero disables the out-of-pinhole monitor.
    pub monitor_alarm_factor: f64,
    pub monitor_efficiency: f64,
    pub dark_count_mean: f64,
    /// Single-round pulses per histogram.
    pub trials: u64,
    /// Authentication sessions per verify run.
    pub sessions: u64,
    pub sweep_modes: usize,
    pub s_values: Vec<f64>,
    pub rounds_values: Vec<u32>,
    /// Master seed of every random stream except key manufacture.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            modes: REFERENCE_MODES,
            photons: REFERENCE_PHOTONS,
            eta: reference_eta(),
            key_seed: 1,
            key_model: KeyModel::HaarUnitary,
            records: 100,
            attack: AttackKind::TrueKey,
            random_key_seed: 2,
            emulator_fraction: 0.5,
            flood_mean: 10.0,
            flood_geometry: None,
            blinding_inner: AttackKind::TrueKey,
            rounds: 10,
            threshold: Threshold::Auto,
            fake_fraction: 0.1,
            fake_alarm_limit: 0,
            monitor_alarm_factor: 3.0,
            monitor_efficiency: 1.0,
            dark_count_mean: 0.0,
            trials: 2000,
            sessions: 1,
            sweep_modes: SWEEP_MODES,
            s_values: default_s_values(),
            rounds_values: default_rounds_values(),
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| QsaError::invalid("config", e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Builds the responder model. `attack` is resolved recursively once for
    /// the blinding inner model.
    pub fn attack_model(&self) -> Result<AttackModel> {
        self.model_for(self.attack, true)
    }

    fn model_for(&self, kind: AttackKind, allow_blinding: bool) -> Result<AttackModel> {
        Ok(match kind {
            AttackKind::TrueKey => AttackModel::TrueKey,
            AttackKind::RandomKey => {
                AttackModel::random_key(self.random_key_seed, self.modes, self.key_model)?
            }
            AttackKind::RandomChallenge => AttackModel::RandomChallenge,
            AttackKind::EstimationHeterodyne => {
                AttackModel::estimation(Measurement::HeterodyneSimulated)
            }
            AttackKind::EstimationBound => AttackModel::estimation(Measurement::AnalyticBound),
            AttackKind::PartialEmulator => AttackModel::partial_emulator(self.emulator_fraction)?,
            AttackKind::Blinding => {
                if !allow_blinding {
                    return Err(QsaError::invalid(
                        "blinding_inner",
                        "blinding attacks cannot be nested",
                    ));
                }
                AttackModel::blinding_with_geometry(
                    self.flood_mean,
                    self.flood_geometry,
                    self.model_for(self.blinding_inner, false)?,
                )?
            }
        })
    }
}
