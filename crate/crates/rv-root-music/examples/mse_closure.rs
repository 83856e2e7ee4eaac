//! Check the closed-form deviation variance against a Monte Carlo
//! estimate over independent Gaussian noise blocks, for the true root
//! and the mirror root of the tracked source.
//!
//! Run with: cargo run --release --example mse_closure

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rv_root_music::array_model::{generate_noise, synthesize, Scenario, UlaConfig};
use rv_root_music::estimator::estimate;
use rv_root_music::perturbation::{
    conjugate_extension, factor_spectrum, generalized_params, predicted_deviation,
    theoretical_mse, RootKind,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let array = UlaConfig::new(9, 0.5)?;
    let scenario = Scenario::new(array, vec![30.0, 50.0], 200, 0.0, 7)?;
    let snap = synthesize(&scenario, &mut scenario.trial_rng(0))?;
    let est = estimate(&snap.clean, 2, &array)?;
    let ext = conjugate_extension(&snap.clean, scenario.signal_dim())?;

    let omega = std::f64::consts::PI * 30f64.to_radians().sin();
    let r_30 = est
        .roots
        .selected_true
        .iter()
        .copied()
        .min_by(|a, b| (a.arg() - omega).abs().partial_cmp(&(b.arg() - omega).abs()).unwrap())
        .unwrap();
    let spectrum = factor_spectrum(&est.subspaces, r_30, &array)?;

    let sigma2 = 0.1; // 10 dB
    let draws = 50_000;
    for (kind, label) in [(RootKind::True, "true"), (RootKind::Mirror, "mirror")] {
        let params = generalized_params(&ext, &est.subspaces, &spectrum, kind, &array, 30.0)?;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut acc = 0.0;
        for _ in 0..draws {
            let n_v = generate_noise(&array, 400, sigma2, &mut rng);
            let d = predicted_deviation(&params, &n_v)?;
            acc += d * d;
        }
        let empirical = acc / draws as f64;
        let closed_form = theoretical_mse(&params, sigma2)?;
        println!(
            "{label:>6} root: empirical {empirical:.6e} rad^2, closed form {closed_form:.6e} rad^2, \
             ratio {:.4}",
            empirical / closed_form
        );
    }
    Ok(())
}
