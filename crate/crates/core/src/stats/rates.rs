use serde::Serialize;

use super::poisson::{poisson_at_least, poisson_below};
use crate::error::{QsaError, Result};

/// False-accept / false-reject pair at a combined threshold over `rounds` rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorRates {
    /// `P(Poisson(rounds·mu_attack) ≥ threshold)`.
    pub far: f64,
    /// `P(Poisson(rounds·mu_true) < threshold)`.
    pub frr: f64,
    pub threshold: u64,
    pub mu_true: f64,
    pub mu_attack: f64,
    pub rounds: u32,
}

impl ErrorRates {
    pub fn max_error(&self) -> f64 {
        self.far.max(self.frr)
    }

    /// `far + frr`.
    pub fn total_error(&self) -> f64 {
        self.far + self.frr
    }
}

fn check_inputs(mu_true: f64, mu_attack: f64, rounds: u32) -> Result<()> {
    for (name, v) in [("mu_true", mu_true), ("mu_attack", mu_attack)] {
        if !v.is_finite() || v < 0.0 {
            return Err(QsaError::invalid(
                name,
                format!("{v} must be finite and non-negative"),
            ));
        }
    }
    if rounds == 0 {
        return Err(QsaError::invalid("rounds", "must be at least 1"));
    }
    Ok(())
}

/// Exact error rates: the sum of `rounds` i.i.d. Poisson counts is Poisson
/// with `rounds` times the mean.
pub fn error_rates(
    mu_true: f64,
    mu_attack: f64,
    threshold: u64,
    rounds: u32,
) -> Result<ErrorRates> {
    check_inputs(mu_true, mu_attack, rounds)?;
    let r = rounds as f64;
    Ok(ErrorRates {
        far: poisson_at_least(r * mu_attack, threshold)?,
        frr: poisson_below(r * mu_true, threshold)?,
        threshold,
        mu_true,
        mu_attack,
        rounds,
    })
}

/// Integer combined threshold minimizing `max(far, frr)`, ties toward the
/// smaller threshold.
pub fn optimal_threshold(mu_true: f64, mu_attack: f64, rounds: u32) -> Result<u64> {
    Ok(optimal_error_rates(mu_true, mu_attack, rounds)?.threshold)
}

/// [`error_rates`] at the [`optimal_threshold`].
pub fn optimal_error_rates(mu_true: f64, mu_attack: f64, rounds: u32) -> Result<ErrorRates> {
    check_inputs(mu_true, mu_attack, rounds)?;
    if mu_true <= mu_attack {
        return Err(QsaError::NoSeparation { mu_true, mu_attack });
    }
    // far falls and frr rises with the threshold, so max(far, frr) is unimodal:
    // stop once frr alone exceeds the best value seen.
    let mut best = error_rates(mu_true, mu_attack, 0, rounds)?;
    let mut t = 1;
    loop {
        let cand = error_rates(mu_true, mu_attack, t, rounds)?;
        if cand.max_error() < best.max_error() {
            best = cand;
        }
        if cand.frr > best.max_error() || cand.frr >= 1.0 {
            return Ok(best);
        }
        t += 1;
    }
}
