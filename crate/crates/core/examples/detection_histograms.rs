//! Single-round count histograms of the true key and the estimation attack,
//! with the Poisson expectation alongside.

use qsa::adversary::{AttackModel, Measurement};
use qsa::optics::{sample_key, KeyModel};
use qsa::protocol::{enroll, Responder, VerifierParams};
use qsa::stats::{monte_carlo_histogram, poisson_pmf};

fn main() -> qsa::Result<()> {
    let key = sample_key(1, 1100, KeyModel::HaarUnitary)?;
    let db = enroll(&key, 100, 2)?;
    let params = VerifierParams::default();
    let trials = 4000;

    let genuine = AttackModel::TrueKey;
    let attack = AttackModel::estimation(Measurement::AnalyticBound);
    let h_true = monte_carlo_histogram(&Responder::new(&key, &genuine), &db, &params, trials, 5)?;
    let h_att = monte_carlo_histogram(&Responder::new(&key, &attack), &db, &params, trials, 6)?;
    println!(
        "true-key mean {:.3}, attack mean {:.3}",
        h_true.mean, h_att.mean
    );

    println!(
        "{:>5} {:>9} {:>9} {:>9} {:>9}",
        "count", "true", "poisson", "attack", "poisson"
    );
    for k in 0..14 {
        println!(
            "{k:5} {:9.4} {:9.4} {:9.4} {:9.4}",
            h_true.frequency(k),
            poisson_pmf(h_true.mean, k as u64)?,
            h_att.frequency(k),
            poisson_pmf(h_att.mean, k as u64)?,
        );
    }
    Ok(())
}
