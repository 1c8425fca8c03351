use rayon::prelude::*;
use serde::Serialize;

use super::rates::{optimal_error_rates, ErrorRates};
use crate::error::{QsaError, Result};
use crate::optics::expected_conjugation_efficiency;

/// Detection chain used to turn a security parameter into Poisson means.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepParams {
    /// Overall detection efficiency.
    pub eta: f64,
    /// Mean true-key pinhole fraction; `None` uses the phase-conjugation
    /// expectation for the grid's mode count.
    pub gamma_ok: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepCell {
    pub s: f64,
    pub photons: f64,
    pub rounds: u32,
    pub rates: ErrorRates,
}

/// Error rates at the optimal threshold over a rectangular (S, rounds) grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub modes: usize,
    pub s_values: Vec<f64>,
    pub rounds_values: Vec<u32>,
    /// Row-major: all rounds for `s_values[0]`, then `s_values[1]`, ...
    pub cells: Vec<SweepCell>,
}

/// `count` values spaced logarithmically over `[lo, hi]`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
            .collect(),
    }
}

/// Default S axis: 25 log-spaced values over `[1, 50]`.
pub fn default_s_values() -> Vec<f64> {
    log_spaced(1.0, 50.0, 25)
}

/// Default rounds axis: `1..=30`.
pub fn default_rounds_values() -> Vec<u32> {
    (1..=30).collect()
}

/// For every `S` the photon number is `n = K/S`, the true-key mean
/// `n·eta·|γ_OK|²` and the attack mean that divided by `S + 1`.
pub fn sweep_security(
    modes: usize,
    s_values: &[f64],
    rounds_values: &[u32],
    params: &SweepParams,
) -> Result<SweepGrid> {
    if modes == 0 {
        return Err(QsaError::InvalidDimension(0));
    }
    if s_values.is_empty() {
        return Err(QsaError::invalid("s_values", "empty"));
    }
    if rounds_values.is_empty() {
        return Err(QsaError::invalid("rounds_values", "empty"));
    }
    if let Some(s) = s_values.iter().find(|s| !s.is_finite() || **s <= 0.0) {
        return Err(QsaError::invalid(
            "s_values",
            format!("{s} must be positive"),
        ));
    }
    if !(params.eta > 0.0 && params.eta <= 1.0) {
        return Err(QsaError::invalid(
            "eta",
            format!("{} not in (0, 1]", params.eta),
        ));
    }
    let gamma_ok = params
        .gamma_ok
        .unwrap_or_else(|| expected_conjugation_efficiency(modes));

    let jobs: Vec<(f64, u32)> = s_values
        .iter()
        .flat_map(|&s| rounds_values.iter().map(move |&r| (s, r)))
        .collect();
    let cells = jobs
        .par_iter()
        .map(|&(s, rounds)| {
            let photons = modes as f64 / s;
            let mu_true = photons * params.eta * gamma_ok;
            let mu_attack = mu_true / (s + 1.0);
            Ok(SweepCell {
                s,
                photons,
                rounds,
                rates: optimal_error_rates(mu_true, mu_attack, rounds)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepGrid {
        modes,
        s_values: s_values.to_vec(),
        rounds_values: rounds_values.to_vec(),
        cells,
    })
}

impl SweepGrid {
    pub fn cell(&self, s_index: usize, rounds_index: usize) -> &SweepCell {
        &self.cells[s_index * self.rounds_values.len() + rounds_index]
    }

    /// Cells of one S column, ordered by rounds.
    pub fn column(&self, s_index: usize) -> &[SweepCell] {
        let w = self.rounds_values.len();
        &self.cells[s_index * w..(s_index + 1) * w]
    }

    /// Cells of one rounds row, ordered by S.
    pub fn row(&self, rounds_index: usize) -> Vec<&SweepCell> {
        (0..self.s_values.len())
            .map(|s| self.cell(s, rounds_index))
            .collect()
    }

    /// Whether `far + frr` at the optimal threshold never increases with
    /// rounds in any column (rounds axis assumed ascending).
    pub fn monotone_in_rounds(&self) -> bool {
        self.error_increases(ErrorRates::total_error) == 0
    }

    /// Number of adjacent-rounds pairs, over all columns, where `metric`
    /// increases. `max(far, frr)` does so at high S: the integer threshold
    /// stalls while the attack distribution widens.
    pub fn error_increases(&self, metric: impl Fn(&ErrorRates) -> f64) -> usize {
        (0..self.s_values.len())
            .map(|s| {
                self.column(s)
                    .windows(2)
                    .filter(|w| metric(&w[1].rates) > metric(&w[0].rates))
                    .count()
            })
            .sum()
    }

    /// Fewest rounds in the grid at which column `s_index` reaches `target`.
    pub fn rounds_to_reach(&self, s_index: usize, target: f64) -> Option<u32> {
        self.column(s_index)
            .iter()
            .find(|c| c.rates.max_error() <= target)
            .map(|c| c.rounds)
    }

    /// Number of times, along each rounds row, the dominant error switches
    /// between false accept and false reject. An integer threshold makes the
    /// balance jump as S varies; a continuous one would keep it fixed.
    pub fn dominance_switches(&self, rounds_index: usize) -> usize {
        let signs: Vec<bool> = self
            .row(rounds_index)
            .iter()
            .filter(|c| c.rates.far != c.rates.frr)
            .map(|c| c.rates.far > c.rates.frr)
            .collect();
        signs.windows(2).filter(|w| w[0] != w[1]).count()
    }

    /// Whether some row shows integer-threshold quantization steps: the
    /// threshold is piecewise constant in S and the dominant error flips back
    /// and forth at least twice.
    pub fn has_quantization_steps(&self) -> bool {
        (0..self.rounds_values.len()).any(|r| {
            let thresholds: Vec<u64> = self.row(r).iter().map(|c| c.rates.threshold).collect();
            let plateaus = thresholds.windows(2).any(|w| w[0] == w[1]);
            let steps = thresholds.windows(2).any(|w| w[0] != w[1]);
            plateaus && steps && self.dominance_switches(r) >= 2
        })
    }
}
