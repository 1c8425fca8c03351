//! Optimal-threshold error over security parameter and repetitions at K = 1062.

use qsa::protocol::{reference_eta, SWEEP_MODES};
use qsa::stats::{default_rounds_values, log_spaced, sweep_security, SweepParams};

fn main() -> qsa::Result<()> {
    let s_values = log_spaced(1.0, 50.0, 12);
    let rounds = default_rounds_values();
    let grid = sweep_security(
        SWEEP_MODES,
        &s_values,
        &rounds,
        &SweepParams {
            eta: reference_eta(),
            gamma_ok: None,
        },
    )?;

    print!("{:>7}", "R \\ S");
    for s in &s_values {
        print!("{s:>9.2}");
    }
    println!();
    for (ri, r) in rounds.iter().enumerate().step_by(3) {
        print!("{r:>7}");
        for c in grid.row(ri) {
            print!("{:>9.1e}", c.rates.max_error());
        }
        println!();
    }
    for (i, s) in s_values.iter().enumerate() {
        match grid.rounds_to_reach(i, 1e-4) {
            Some(r) => println!("S = {s:5.2}: 1e-4 after {r} rounds"),
            None => println!(
                "S = {s:5.2}: 1e-4 not reached within {} rounds",
                rounds.last().unwrap()
            ),
        }
    }
    Ok(())
}
