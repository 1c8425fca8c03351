//! Poisson distribution evaluated in log space with compensated summation, so
//! that tails far below `f64::EPSILON` relative to one remain accurate.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{QsaError, Result};

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn check_mean(mu: f64) -> Result<()> {
    if !mu.is_finite() || mu < 0.0 {
        return Err(QsaError::invalid(
            "mu",
            format!("{mu} must be finite and non-negative"),
        ));
    }
    Ok(())
}

fn ln_pmf(mu: f64, k: u64) -> f64 {
    if mu == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let kf = k as f64;
    kf * mu.ln() - mu - ln_gamma(kf + 1.0)
}

/// `P(X = k)` for `X ~ Poisson(mu)`.
pub fn poisson_pmf(mu: f64, k: u64) -> Result<f64> {
    check_mean(mu)?;
    Ok(ln_pmf(mu, k).exp())
}

/// `P(X ≤ k)`.
pub fn poisson_cdf(mu: f64, k: u64) -> Result<f64> {
    check_mean(mu)?;
    Ok(if (k as f64) < mu {
        lower_sum(mu, k)
    } else {
        1.0 - upper_sum(mu, k)
    })
}

/// `P(X > k)`.
pub fn poisson_sf(mu: f64, k: u64) -> Result<f64> {
    check_mean(mu)?;
    Ok(if (k as f64) < mu {
        1.0 - lower_sum(mu, k)
    } else {
        upper_sum(mu, k)
    })
}

/// `P(X ≥ k)`.
pub fn poisson_at_least(mu: f64, k: u64) -> Result<f64> {
    if k == 0 {
        check_mean(mu)?;
        return Ok(1.0);
    }
    poisson_sf(mu, k - 1)
}

/// `P(X < k)`.
pub fn poisson_below(mu: f64, k: u64) -> Result<f64> {
    if k == 0 {
        check_mean(mu)?;
        return Ok(0.0);
    }
    poisson_cdf(mu, k - 1)
}

/// `Σ_{j ≤ k} pmf(j)`, summed from the mode side down so small terms are not lost.
fn lower_sum(mu: f64, k: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    let mut j = k;
    loop {
        let term = ln_pmf(mu, j).exp();
        acc.add(term);
        if j == 0 || (term < acc.value() * 1e-18 && (j as f64) < mu) {
            break;
        }
        j -= 1;
    }
    acc.value().min(1.0)
}

/// `Σ_{j > k} pmf(j)` for `k ≥ mu`; terms decrease monotonically.
fn upper_sum(mu: f64, k: u64) -> f64 {
    let mut acc = CompensatedSum::default();
    let mut j = k + 1;
    loop {
        let term = ln_pmf(mu, j).exp();
        acc.add(term);
        if term == 0.0 || term < acc.value() * 1e-18 {
            break;
        }
        j += 1;
    }
    acc.value().min(1.0)
}

/// Smallest `k` with `P(X ≤ k) ≥ p`.
pub fn poisson_quantile(mu: f64, p: f64) -> Result<u64> {
    check_mean(mu)?;
    if !(0.0..1.0).contains(&p) {
        return Err(QsaError::invalid("p", format!("{p} not in [0, 1)")));
    }
    // Above the mean compare the upper tail with `1 - p`; the summed CDF
    // saturates before reaching `p` close to one.
    let reached = |k: u64| {
        if (k as f64) < mu {
            lower_sum(mu, k) >= p
        } else {
            upper_sum(mu, k) <= 1.0 - p
        }
    };
    let mut hi = (mu + 10.0 * mu.sqrt() + 10.0) as u64;
    while !reached(hi) {
        hi = hi * 2 + 1;
    }
    let mut lo = 0;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reached(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

/// Draws from `Poisson(mu)`; `mu = 0` always yields zero.
pub fn sample_poisson<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    if mu <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mu).expect("finite positive Poisson mean");
    dist.sample(rng) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct series `e^{-μ} Σ μ^j / j!`, valid for small arguments.
    fn series_cdf(mu: f64, k: u64) -> f64 {
        let mut term = (-mu).exp();
        let mut sum = term;
        for j in 1..=k {
            term *= mu / j as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn degenerate_mean() {
        assert_eq!(poisson_pmf(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(0.0, 3).unwrap(), 0.0);
        assert_eq!(poisson_cdf(0.0, 0).unwrap(), 1.0);
        assert_eq!(poisson_sf(0.0, 0).unwrap(), 0.0);
    }

    #[test]
    fn negative_mean_rejected() {
        assert!(poisson_pmf(-1.0, 0).is_err());
        assert!(poisson_cdf(f64::NAN, 0).is_err());
    }

    #[test]
    fn small_cdf_values_match_series() {
        // e^{-4.3}(1 + 4.3 + 4.3²/2)
        let expected = (-4.3f64).exp() * (1.0 + 4.3 + 4.3 * 4.3 / 2.0);
        assert!((poisson_cdf(4.3, 2).unwrap() - expected).abs() < 1e-14);
        assert!((poisson_cdf(4.3, 2).unwrap() - 0.197).abs() < 5e-4);
        assert!((poisson_sf(0.86, 2).unwrap() - 0.056).abs() < 5e-4);
        for mu in [0.01, 0.5, 3.0, 12.0, 40.0] {
            for k in [0, 1, 5, 20, 60] {
                let a = poisson_cdf(mu, k).unwrap();
                assert!((a - series_cdf(mu, k)).abs() < 1e-13, "mu={mu} k={k}");
            }
        }
    }

    #[test]
    fn deep_tails_match_statrs() {
        use statrs::distribution::{DiscreteCDF, Poisson as StatrsPoisson};
        for (mu, k) in [
            (8.6, 40u64),
            (17.2, 60),
            (86.0, 30),
            (43.0, 10),
            (1e4, 9000),
            (1e4, 11000),
        ] {
            let d = StatrsPoisson::new(mu).unwrap();
            let ours_sf = poisson_sf(mu, k).unwrap();
            let ref_sf = d.sf(k);
            let ours_cdf = poisson_cdf(mu, k).unwrap();
            let ref_cdf = d.cdf(k);
            assert!(
                ((ours_sf - ref_sf) / ref_sf.max(1e-300)).abs() < 1e-8
                    || (ours_sf - ref_sf).abs() < 1e-15,
                "sf mu={mu} k={k}: {ours_sf} vs {ref_sf}"
            );
            assert!(
                ((ours_cdf - ref_cdf) / ref_cdf.max(1e-300)).abs() < 1e-8
                    || (ours_cdf - ref_cdf).abs() < 1e-15,
                "cdf mu={mu} k={k}: {ours_cdf} vs {ref_cdf}"
            );
        }
    }

    #[test]
    fn large_arguments_stay_finite() {
        let p = poisson_pmf(1e4, 100_000).unwrap();
        assert!(p == 0.0 || p.is_finite());
        assert_eq!(poisson_cdf(1e4, 100_000).unwrap(), 1.0);
        assert!(poisson_sf(1e4, 100_000).unwrap() < 1e-300);
        let total: f64 = (0..20_000).map(|k| poisson_pmf(1e4, k).unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn quantiles() {
        assert_eq!(poisson_quantile(0.0, 0.999).unwrap(), 0);
        // P(0) = e^{-0.005} ≈ 0.995 < 0.999 ≤ P(X ≤ 1)
        assert_eq!(poisson_quantile(0.005, 0.999).unwrap(), 1);
        let q = poisson_quantile(500.0, 0.5).unwrap();
        assert!(poisson_cdf(500.0, q).unwrap() >= 0.5);
        assert!(poisson_cdf(500.0, q - 1).unwrap() < 0.5);
        let q = poisson_quantile(40.0, 1.0 - 1e-15).unwrap();
        assert!(poisson_sf(40.0, q).unwrap() <= 1e-15);
        assert!(poisson_sf(40.0, q - 1).unwrap() > 1e-15);
    }

    #[test]
    fn sampler_handles_zero() {
        let mut rng = crate::seeding::rng_from_seed(1);
        assert_eq!(sample_poisson(0.0, &mut rng), 0);
    }

    proptest::proptest! {
        #[test]
        fn cdf_and_sf_are_complementary(mu in 0.0f64..300.0, k in 0u64..600) {
            let c = poisson_cdf(mu, k).unwrap();
            let s = poisson_sf(mu, k).unwrap();
            proptest::prop_assert!((c + s - 1.0).abs() < 1e-12);
            proptest::prop_assert!((0.0..=1.0).contains(&c));
        }

        #[test]
        fn pmf_sums_to_one(mu in 0.0f64..2000.0) {
            let hi = (mu + 12.0 * mu.sqrt() + 30.0) as u64;
            let total: f64 = (0..=hi).map(|k| poisson_pmf(mu, k).unwrap()).sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
