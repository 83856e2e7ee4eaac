//! RMSE versus SNR for the 9-element reference scenario: empirical
//! Monte Carlo error of the 30-degree source against the predicted
//! RMSE, for the true root and its mirror. Defaults to 200 trials per
//! point; pass a trial count as the first argument for more.
//!
//! Run with: cargo run --release --example snr_sweep [trials]

use rv_root_music::array_model::{Scenario, UlaConfig};
use rv_root_music::experiments::{run_sweep, SweepSpec, SweepVariable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(200);
    let array = UlaConfig::new(9, 0.5)?;
    let spec = SweepSpec {
        base: Scenario::new(array, vec![30.0, 50.0], 200, 0.0, 42)?,
        sweep_variable: SweepVariable::SnrDb,
        sweep_values: (0..=10).map(|k| 2.0 * k as f64).collect(),
        trials,
        tracked_source_deg: 30.0,
    };
    let rows = run_sweep(&spec)?;
    println!(
        "{:>7} {:>14} {:>14} {:>14} {:>14} {:>6}",
        "snr_db", "true emp (deg)", "true pred", "mirror emp", "mirror pred", "fails"
    );
    for r in rows {
        println!(
            "{:>7.1} {:>14.6} {:>14.6} {:>14.6} {:>14.6} {:>6}",
            r.sweep_value,
            r.rmse_true_emp_deg,
            r.rmse_true_theory_deg,
            r.rmse_mirror_emp_deg,
            r.rmse_mirror_theory_deg,
            r.failures
        );
    }
    Ok(())
}
