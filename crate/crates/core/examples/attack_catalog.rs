//! Mean pinhole counts of every responder model against one database.

use qsa::adversary::{AttackModel, Measurement};
use qsa::optics::{sample_key, KeyModel};
use qsa::protocol::{enroll, run_round, Responder, VerifierParams};
use qsa::seeding::rng_from_seed;

fn main() -> qsa::Result<()> {
    let modes = 1100;
    let key = sample_key(1, modes, KeyModel::HaarUnitary)?;
    let db = enroll(&key, 40, 2)?;
    let params = VerifierParams::default();
    let s = modes as f64 / params.photons;
    println!("K = {modes}, n = {}, S = {s:.2}", params.photons);

    let models = [
        AttackModel::TrueKey,
        AttackModel::random_key(9, modes, KeyModel::HaarUnitary)?,
        AttackModel::RandomChallenge,
        AttackModel::estimation(Measurement::HeterodyneSimulated),
        AttackModel::estimation(Measurement::AnalyticBound),
        AttackModel::partial_emulator(0.5)?,
        AttackModel::partial_emulator(0.9)?,
    ];
    let mut rng = rng_from_seed(3);
    let rounds = 400;
    for model in &models {
        let responder = Responder::new(&key, model);
        let mut total = 0;
        for i in 0..rounds {
            let record = &db.records()[i % db.len()];
            total += run_round(&responder, record, &params, &mut rng)?.counts;
        }
        println!(
            "{:24} mean counts {:.3}",
            model.label(),
            total as f64 / rounds as f64
        );
    }
    Ok(())
}
