//! Compare the first-order deviation prediction against the deviation
//! the full estimator actually produces, for one fixed noise draw
//! scaled over several magnitudes. The relative error shrinks linearly
//! with the noise scale.
//!
//! Run with: cargo run --release --example predict_deviation

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rv_root_music::array_model::{generate_noise, synthesize, Scenario, UlaConfig};
use rv_root_music::estimator::estimate;
use rv_root_music::perturbation::{conjugate_extend_noise, report_for_clean};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let array = UlaConfig::new(9, 0.5)?;
    let scenario = Scenario::new(array, vec![30.0, 50.0], 200, 0.0, 5)?;
    let snap = synthesize(&scenario, &mut scenario.trial_rng(0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    let noise = generate_noise(&array, 200, 1.0, &mut rng);

    println!("tracked source: 30 deg, one fixed noise draw scaled by eps");
    println!("{:>8} {:>16} {:>16} {:>12}", "eps", "measured (rad)", "predicted (rad)", "rel err");
    for eps in [1e-2, 1e-3, 1e-4, 1e-5] {
        let scaled = &noise * Complex64::new(eps, 0.0);
        let n_v = conjugate_extend_noise(&scaled);
        let report = report_for_clean(&scenario, &snap.clean, &n_v)?;
        let predicted = report.per_source[0].predicted_dtheta_rad;

        let est = estimate(&(&snap.clean + scaled), 2, &array)?;
        let theta_hat = est
            .doa
            .angles_deg
            .iter()
            .copied()
            .min_by(|a, b| (a - 30.0).abs().partial_cmp(&(b - 30.0).abs()).unwrap())
            .unwrap();
        let measured = (theta_hat - 30.0).to_radians();
        println!(
            "{:>8.0e} {:>16.6e} {:>16.6e} {:>12.3e}",
            eps,
            measured,
            predicted,
            (measured - predicted).abs() / predicted.abs()
        );
    }
    Ok(())
}
