//! A detector-flooding attack against fake challenges and the monitor detector.

use qsa::adversary::{AttackModel, Measurement};
use qsa::optics::{sample_key, KeyModel};
use qsa::protocol::{authenticate, enroll, Responder, VerifierParams};
use qsa::seeding::stream;

fn main() -> qsa::Result<()> {
    let key = sample_key(1, 1100, KeyModel::HaarUnitary)?;
    let db = enroll(&key, 50, 2)?;
    let sessions = 300;

    println!(
        "{:>6} {:>9} {:>10} {:>12} {:>12} {:>10}",
        "flood", "geometry", "accepted", "fake alarm", "monitor", "any alarm"
    );
    for flood in [0.0, 1.0, 3.0, 10.0, 30.0] {
        // A geometry of 1 keeps the monitor no brighter than the pinhole.
        for (geometry, monitor) in [(None, None), (None, Some(3.0)), (Some(1.0), Some(3.0))] {
            let params = VerifierParams {
                monitor_alarm_factor: monitor,
                ..VerifierParams::default()
            };
            let attack = AttackModel::blinding_with_geometry(
                flood,
                geometry,
                AttackModel::estimation(Measurement::AnalyticBound),
            )?;
            let responder = Responder::new(&key, &attack);
            let (mut acc, mut fake, mut mon, mut any) = (0, 0, 0, 0);
            for i in 0..sessions {
                let d = authenticate(&responder, &db, &params, &mut stream(11, i))?;
                acc += d.accepted as u32;
                fake += d.fake_alarm as u32;
                mon += d.monitor_alarm as u32;
                any += d.blinding_alarm as u32;
            }
            let f = |x: u32| x as f64 / sessions as f64;
            println!(
                "{flood:6.1} {:>9} {:10.3} {:12.3} {:>12} {:10.3}",
                geometry.map_or("K-1".into(), |g: f64| format!("{g}")),
                f(acc),
                f(fake),
                if monitor.is_some() {
                    format!("{:.3}", f(mon))
                } else {
                    "off".into()
                },
                f(any)
            );
        }
    }
    Ok(())
}
