//! Heterodyne challenge estimation versus the 1/(S+1) bound.

use qsa::adversary::estimate_challenge;
use qsa::optics::{challenge_field, BinaryPhaseChallenge};
use qsa::seeding::rng_from_seed;

fn main() -> qsa::Result<()> {
    let modes = 512;
    let mut rng = rng_from_seed(7);
    println!("{:>6} {:>8} {:>10} {:>10}", "S", "n", "overlap", "1/(S+1)");
    for s in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
        let photons = modes as f64 / s;
        let trials = 400;
        let mut total = 0.0;
        for _ in 0..trials {
            let c = challenge_field(&BinaryPhaseChallenge::random(modes, &mut rng)?);
            total += estimate_challenge(&c, photons, &mut rng)?.overlap_sq;
        }
        println!(
            "{s:6.1} {photons:8.1} {:10.4} {:10.4}",
            total / trials as f64,
            1.0 / (s + 1.0)
        );
    }
    Ok(())
}
