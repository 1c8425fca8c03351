use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{QsaError, Result};
use crate::protocol::{run_round, Database, Responder, VerifierParams};
use crate::seeding::stream;

/// Empirical distribution of single-round photodetection counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    /// `occurrences[c]` is the number of trials that registered `c` counts.
    pub occurrences: Vec<u64>,
    pub trials: u64,
    pub mean: f64,
    /// Unbiased sample variance (zero for a single trial).
    pub variance: f64,
}

impl Histogram {
    pub fn from_counts(counts: &[u64]) -> Self {
        let max = counts.iter().copied().max().unwrap_or(0) as usize;
        let mut occurrences = vec![0u64; max + 1];
        for &c in counts {
            occurrences[c as usize] += 1;
        }
        let n = counts.len() as f64;
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
        let variance = if counts.len() > 1 {
            counts
                .iter()
                .map(|&c| (c as f64 - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0)
        } else {
            0.0
        };
        Histogram {
            occurrences,
            trials: counts.len() as u64,
            mean,
            variance,
        }
    }

    /// Relative frequency of `count`.
    pub fn frequency(&self, count: usize) -> f64 {
        self.occurrences.get(count).copied().unwrap_or(0) as f64 / self.trials as f64
    }

    /// Standard error of the sample mean.
    pub fn standard_error(&self) -> f64 {
        (self.variance / self.trials as f64).sqrt()
    }

    /// Count with the highest frequency (smallest on ties).
    pub fn mode(&self) -> usize {
        let best = self.occurrences.iter().copied().max().unwrap_or(0);
        self.occurrences
            .iter()
            .position(|&o| o == best)
            .unwrap_or(0)
    }
}

/// Single-round counts of `trials` independent pulses, each on a uniformly
/// drawn record. Trial `i` draws from sub-stream `i` of `seed`, so the result
/// does not depend on the number of worker threads.
pub fn monte_carlo_histogram(
    responder: &Responder<'_>,
    database: &Database,
    params: &VerifierParams,
    trials: u64,
    seed: u64,
) -> Result<Histogram> {
    if trials == 0 {
        return Err(QsaError::invalid("trials", "must be at least 1"));
    }
    if database.is_empty() {
        return Err(QsaError::EmptyDatabase);
    }
    let counts = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i);
            let record = &database.records()[rng.random_range(0..database.len())];
            run_round(responder, record, params, &mut rng).map(|r| r.counts)
        })
        .collect::<Result<Vec<u64>>>()?;
    Ok(Histogram::from_counts(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_trial_histogram() {
        let h = Histogram::from_counts(&[3]);
        assert_eq!(h.occurrences, vec![0, 0, 0, 1]);
        assert_eq!(h.frequency(3), 1.0);
        assert_eq!((h.mean, h.variance), (3.0, 0.0));
    }

    #[test]
    fn moments() {
        let h = Histogram::from_counts(&[0, 1, 1, 2, 6]);
        assert_eq!(h.mean, 2.0);
        assert_eq!(h.variance, 5.5);
        assert_eq!(h.mode(), 1);
        assert_eq!(h.frequency(9), 0.0);
    }
}
