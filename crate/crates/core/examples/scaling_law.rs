//! Pinhole fraction for challenges that partially overlap an enrolled one.

use qsa::optics::{challenge_field, decode_gamma_sq, inner_product, sample_key, KeyModel};
use qsa::protocol::enroll;
use qsa::seeding::rng_from_seed;

fn main() -> qsa::Result<()> {
    let modes = 512;
    let key = sample_key(5, modes, KeyModel::HaarUnitary)?;
    let db = enroll(&key, 1, 6)?;
    let record = &db.records()[0];
    let c0 = challenge_field(&record.challenge);
    let mut rng = rng_from_seed(8);

    println!(
        "{:>8} {:>12} {:>10} {:>10}",
        "flipped", "|C0.C1|^2", "gamma_sq", "ratio"
    );
    for flipped in (0..=modes / 2).step_by(modes / 16) {
        let idx = rand::seq::index::sample(&mut rng, modes, flipped).into_vec();
        let c1 = challenge_field(&record.challenge.with_flipped(idx));
        let overlap = inner_product(&c0, &c1)?.norm_sqr();
        let gamma = decode_gamma_sq(&key, &c1, &record.decode_mask)?;
        let ratio = if overlap > 1e-9 {
            gamma / overlap
        } else {
            f64::NAN
        };
        println!("{flipped:8} {overlap:12.4} {gamma:10.4} {ratio:10.4}");
    }
    Ok(())
}
