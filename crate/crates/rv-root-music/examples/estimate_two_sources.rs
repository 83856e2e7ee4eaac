//! Estimate two source directions with a 9-element half-wavelength
//! array, first on clean data and then at 20 dB SNR.
//!
//! Run with: cargo run --release --example estimate_two_sources

use rv_root_music::array_model::{synthesize, Scenario, UlaConfig};
use rv_root_music::estimator::estimate;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let array = UlaConfig::new(9, 0.5)?;

    for (label, noise_power) in [("noiseless", 0.0), ("20 dB SNR", 0.01)] {
        let scenario = Scenario::new(array, vec![30.0, 50.0], 200, noise_power, 7)?;
        let snap = synthesize(&scenario, &mut scenario.trial_rng(0))?;
        let est = estimate(&snap.observed, 2, &array)?;

        println!("{label}:");
        println!("  estimated DOAs: {:?}", est.doa.angles_deg);
        println!("  rejected mirrors: {:?}", est.doa.mirror_angles_deg);
        println!(
            "  signal eigenvalues: {:?}",
            est.subspaces
                .signal_eigenvalues
                .iter()
                .map(|v| (v * 1e3).round() / 1e3)
                .collect::<Vec<_>>()
        );
        for z in &est.roots.selected_true {
            println!("  true root |z| = {:.9}, arg = {:.9} rad", z.norm(), z.arg());
        }
    }
    Ok(())
}
