//! False accept and reject rates versus repetitions for the reference means.

use qsa::stats::{error_rates, optimal_error_rates};

fn main() -> qsa::Result<()> {
    let (mu_true, mu_attack) = (4.3, 0.86);
    let single = error_rates(mu_true, mu_attack, 3, 1)?;
    println!(
        "single round, threshold 3: far {:.4}, frr {:.4}",
        single.far, single.frr
    );

    println!(
        "{:>6} {:>9} {:>11} {:>11}",
        "rounds", "threshold", "far", "frr"
    );
    for rounds in [1, 2, 5, 10, 15, 20, 30] {
        let r = optimal_error_rates(mu_true, mu_attack, rounds)?;
        println!(
            "{rounds:6} {:9} {:11.3e} {:11.3e}",
            r.threshold, r.far, r.frr
        );
    }
    Ok(())
}
