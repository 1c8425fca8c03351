use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::{AttackKind, ExperimentConfig, Threshold};
use super::CliError;
use crate::error::QsaError;
use crate::optics::{sample_key, ScatteringKey};
use crate::protocol::{authenticate, enroll, Database, Decision, Responder, VerifierParams};
use crate::seeding::{derive_seed, stream};
use crate::stats::{monte_carlo_histogram, sweep_security, Histogram, SweepGrid, SweepParams};

const ENROLL_STREAM: u64 = 0xE0;
const VERIFY_STREAM: u64 = 0xA0;
const HIST_STREAM: u64 = 0xB0;

pub(crate) fn read_database(path: &Path) -> Result<Database, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Database::from_json(&text).map_err(|e| match e {
        QsaError::Format(msg) => CliError::Format {
            path: path.to_path_buf(),
            msg,
        },
        other => CliError::Model(other),
    })
}

/// Provenance header: the resolved configuration as commented TOML.
pub fn config_header(command: &str, config: &ExperimentConfig) -> String {
    let mut out = format!("# qsa {command}\n");
    for line in config.to_toml().lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

fn manufacture_key(config: &ExperimentConfig) -> Result<ScatteringKey, CliError> {
    Ok(sample_key(config.key_seed, config.modes, config.key_model)?)
}

fn verifier_params(
    config: &ExperimentConfig,
    database: &Database,
) -> Result<VerifierParams, CliError> {
    let mut params = VerifierParams {
        photons: config.photons,
        eta: config.eta,
        threshold: 0,
        rounds: config.rounds,
        fake_challenge_fraction: config.fake_fraction,
        fake_alarm_limit: config.fake_alarm_limit,
        monitor_efficiency: config.monitor_efficiency,
        monitor_alarm_factor: (config.monitor_alarm_factor > 0.0)
            .then_some(config.monitor_alarm_factor),
        dark_count_mean: config.dark_count_mean,
        saturation: None,
    };
    params.threshold = match config.threshold {
        Threshold::Fixed(t) => t,
        Threshold::Auto => {
            params.auto_threshold(database.modes(), database.mean_expected_gamma_sq())?
        }
    };
    params.validate()?;
    Ok(params)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnrollSummary {
    pub key_id: String,
    pub modes: usize,
    pub records: usize,
    pub mean_expected_gamma_sq: f64,
}

/// Enrolls `config.records` pairs of the configured key.
pub fn cmd_enroll(config: &ExperimentConfig) -> Result<(Database, EnrollSummary), CliError> {
    if config.records == 0 {
        return Err(CliError::Usage("records must be at least 1".into()));
    }
    let key = manufacture_key(config)?;
    let db = enroll(
        &key,
        config.records,
        derive_seed(config.seed, ENROLL_STREAM),
    )?;
    let summary = EnrollSummary {
        key_id: db.key_id().to_string(),
        modes: db.modes(),
        records: db.len(),
        mean_expected_gamma_sq: db.mean_expected_gamma_sq(),
    };
    Ok((db, summary))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub database_key_id: String,
    pub presented_key_id: String,
    pub attack: String,
    pub modes: usize,
    pub photons: f64,
    pub eta: f64,
    pub rounds: u32,
    pub threshold: u64,
    pub sessions: u64,
    pub accepted: u64,
    pub alarms: u64,
    pub decisions: Vec<Decision>,
}

impl VerifyReport {
    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.sessions as f64
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "database key   {}", self.database_key_id);
        let _ = writeln!(
            s,
            "responder      {} ({})",
            self.attack, self.presented_key_id
        );
        let _ = writeln!(s, "modes K        {}", self.modes);
        let _ = writeln!(
            s,
            "photons n      {}  (S = {:.3})",
            self.photons,
            self.modes as f64 / self.photons
        );
        let _ = writeln!(s, "rounds         {}", self.rounds);
        let _ = writeln!(s, "threshold      {}", self.threshold);
        if self.sessions == 1 {
            let d = &self.decisions[0];
            let counts: Vec<String> = d
                .per_round
                .iter()
                .map(|r| {
                    if r.was_fake {
                        format!("[{}]", r.counts)
                    } else {
                        r.counts.to_string()
                    }
                })
                .collect();
            let _ = writeln!(s, "round counts   {}  ([..] = fake)", counts.join(" "));
            let _ = writeln!(s, "total          {}", d.total_counts);
            let _ = writeln!(
                s,
                "alarms         fake={} monitor={}",
                d.fake_alarm, d.monitor_alarm
            );
            let _ = writeln!(
                s,
                "decision       {}",
                if d.accepted { "ACCEPT" } else { "REJECT" }
            );
        } else {
            let _ = writeln!(s, "sessions       {}", self.sessions);
            let _ = writeln!(
                s,
                "accepted       {} ({:.6})",
                self.accepted,
                self.acceptance_rate()
            );
            let _ = writeln!(s, "alarms         {}", self.alarms);
        }
        s
    }
}

/// Runs `config.sessions` authentications of the configured responder against
/// `database`. Session `i` uses sub-stream `i` of the verify stream.
pub fn cmd_verify(
    config: &ExperimentConfig,
    database: &Database,
) -> Result<VerifyReport, CliError> {
    if config.sessions == 0 {
        return Err(CliError::Usage("sessions must be at least 1".into()));
    }
    if database.modes() != config.modes {
        return Err(CliError::Model(QsaError::DimensionMismatch {
            expected: database.modes(),
            found: config.modes,
        }));
    }
    let key = manufacture_key(config)?;
    let attack = config.attack_model()?;
    let params = verifier_params(config, database)?;
    let responder = Responder::new(&key, &attack);
    let master = derive_seed(config.seed, VERIFY_STREAM);

    use rayon::prelude::*;
    let decisions = (0..config.sessions)
        .into_par_iter()
        .map(|i| authenticate(&responder, database, &params, &mut stream(master, i)))
        .collect::<Result<Vec<_>, _>>()?;

    let presented_key_id = match &attack {
        crate::adversary::AttackModel::RandomKey(k) => k.id(),
        _ => key.id(),
    };
    Ok(VerifyReport {
        database_key_id: database.key_id().to_string(),
        presented_key_id,
        attack: config.attack.to_string(),
        modes: database.modes(),
        photons: params.photons,
        eta: params.eta,
        rounds: params.rounds,
        threshold: params.threshold,
        sessions: config.sessions,
        accepted: decisions.iter().filter(|d| d.accepted).count() as u64,
        alarms: decisions.iter().filter(|d| d.blinding_alarm).count() as u64,
        decisions,
    })
}

/// `attack` is `verify` with a non-trivial responder required.
pub fn cmd_attack(
    config: &ExperimentConfig,
    database: &Database,
) -> Result<VerifyReport, CliError> {
    if config.attack == AttackKind::TrueKey {
        return Err(CliError::Usage(
            "attack requires --attack other than true-key".into(),
        ));
    }
    cmd_verify(config, database)
}

/// Single-round count histogram of the configured responder. Without a
/// database file the configured key is enrolled in memory first.
pub fn cmd_hist(
    config: &ExperimentConfig,
    database: Option<&Database>,
) -> Result<(Histogram, String), CliError> {
    if config.trials == 0 {
        return Err(CliError::Usage("trials must be at least 1".into()));
    }
    let owned;
    let database = match database {
        Some(db) => db,
        None => {
            owned = cmd_enroll(config)?.0;
            &owned
        }
    };
    if database.modes() != config.modes {
        return Err(CliError::Model(QsaError::DimensionMismatch {
            expected: database.modes(),
            found: config.modes,
        }));
    }
    let key = manufacture_key(config)?;
    let attack = config.attack_model()?;
    let params = verifier_params(config, database)?;
    let hist = monte_carlo_histogram(
        &Responder::new(&key, &attack),
        database,
        &params,
        config.trials,
        derive_seed(config.seed, HIST_STREAM),
    )?;

    let mut out = config_header("hist", config);
    let _ = writeln!(out, "# trials = {}", hist.trials);
    let _ = writeln!(out, "# sample_mean = {}", hist.mean);
    let _ = writeln!(out, "# sample_variance = {}", hist.variance);
    out.push_str("count,frequency\n");
    for count in 0..hist.occurrences.len() {
        let _ = writeln!(out, "{},{}", count, hist.frequency(count));
    }
    Ok((hist, out))
}

/// Optimal-threshold error rates over the configured (S, rounds) grid.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<(SweepGrid, String), CliError> {
    if config.s_values.is_empty() {
        return Err(CliError::Usage("s_values is empty".into()));
    }
    if config.rounds_values.is_empty() {
        return Err(CliError::Usage("rounds_values is empty".into()));
    }
    let grid = sweep_security(
        config.sweep_modes,
        &config.s_values,
        &config.rounds_values,
        &SweepParams {
            eta: config.eta,
            gamma_ok: None,
        },
    )?;
    let mut out = config_header("sweep", config);
    out.push_str("S,n,rounds,threshold,far,frr\n");
    for c in &grid.cells {
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e}",
            c.s, c.photons, c.rounds, c.rates.threshold, c.rates.far, c.rates.frr
        );
    }
    Ok((grid, out))
}
