//! RMSE versus snapshot count at 10 dB SNR: doubling the snapshots
//! keeps improving the estimate, but with diminishing returns.
//! Defaults to 200 trials per point; pass a trial count to override.
//!
//! Run with: cargo run --release --example snapshot_sweep [trials]

use rv_root_music::array_model::{Scenario, UlaConfig};
use rv_root_music::experiments::{run_sweep, snr_db_to_noise_power, SweepSpec, SweepVariable};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let trials: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(200);
    let array = UlaConfig::new(9, 0.5)?;
    let spec = SweepSpec {
        base: Scenario::new(array, vec![30.0, 50.0], 200, snr_db_to_noise_power(10.0), 42)?,
        sweep_variable: SweepVariable::Snapshots,
        sweep_values: (5..=12).map(|n| f64::from(1u32 << n)).collect(),
        trials,
        tracked_source_deg: 30.0,
    };
    let rows = run_sweep(&spec)?;
    println!(
        "{:>9} {:>14} {:>14} {:>10}",
        "snapshots", "true emp (deg)", "true pred", "gain"
    );
    let mut prev: Option<f64> = None;
    for r in rows {
        let gain = prev
            .map(|p| format!("{:.3}x", p / r.rmse_true_emp_deg))
            .unwrap_or_default();
        println!(
            "{:>9} {:>14.6} {:>14.6} {:>10}",
            r.sweep_value, r.rmse_true_emp_deg, r.rmse_true_theory_deg, gain
        );
        prev = Some(r.rmse_true_emp_deg);
    }
    Ok(())
}
