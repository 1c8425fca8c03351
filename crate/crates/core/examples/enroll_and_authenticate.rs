//! Enroll a key, save the database, and authenticate the genuine key and an
//! impostor against it.

use qsa::adversary::AttackModel;
use qsa::optics::{sample_key, KeyModel};
use qsa::protocol::{authenticate, enroll, Database, Responder, VerifierParams};
use qsa::seeding::rng_from_seed;

fn main() -> qsa::Result<()> {
    let key = sample_key(1, 1100, KeyModel::HaarUnitary)?;
    let db = enroll(&key, 50, 2)?;
    println!(
        "enrolled {} records, mean gamma_sq {:.4}",
        db.len(),
        db.mean_expected_gamma_sq()
    );

    let path = std::env::temp_dir().join("qsa_example_db.json");
    std::fs::write(&path, db.to_json()).expect("write database");
    let db = Database::from_json(&std::fs::read_to_string(&path).expect("read database"))?;

    let params = VerifierParams::default();
    println!(
        "threshold {} over {} rounds",
        params.threshold, params.rounds
    );

    let mut rng = rng_from_seed(3);
    let genuine = AttackModel::TrueKey;
    let impostor = AttackModel::random_key(99, 1100, KeyModel::HaarUnitary)?;
    for (name, attack) in [("genuine key", &genuine), ("random key", &impostor)] {
        let d = authenticate(&Responder::new(&key, attack), &db, &params, &mut rng)?;
        println!(
            "{name:12} total {:3}  fake rounds {}  alarm {}  -> {}",
            d.total_counts,
            d.fake_rounds,
            d.blinding_alarm,
            if d.accepted { "ACCEPT" } else { "REJECT" }
        );
    }
    Ok(())
}
