//! Speckle intensities of a key response follow an exponential distribution.

use qsa::optics::{challenge_field, propagate, sample_key, BinaryPhaseChallenge, KeyModel};
use qsa::seeding::rng_from_seed;

fn main() -> qsa::Result<()> {
    let modes = 1024;
    let key = sample_key(3, modes, KeyModel::HaarUnitary)?;
    let mut rng = rng_from_seed(4);
    let mut scaled = Vec::new();
    for _ in 0..20 {
        let c = challenge_field(&BinaryPhaseChallenge::random(modes, &mut rng)?);
        scaled.extend(
            propagate(&key, &c)?
                .intensities()
                .iter()
                .map(|i| i * modes as f64),
        );
    }
    let n = scaled.len() as f64;
    let m1 = scaled.iter().sum::<f64>() / n;
    let m2 = scaled.iter().map(|x| x * x).sum::<f64>() / n;
    println!(
        "{} samples, mean {m1:.4}, <I^2>/<I>^2 = {:.4} (exponential: 2)",
        scaled.len(),
        m2 / (m1 * m1)
    );

    println!("{:>5} {:>10} {:>10}", "I", "P(I > x)", "exp(-x)");
    for x in [0.5, 1.0, 2.0, 3.0, 4.0, 6.0] {
        let tail = scaled.iter().filter(|&&v| v > x).count() as f64 / n;
        println!("{x:5.1} {tail:10.4} {:10.4}", (-x).exp());
    }
    Ok(())
}
