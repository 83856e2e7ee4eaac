//! Acceptance suite: every criterion prints one PASS/FAIL line.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion lines and timings.

use std::time::Instant;

use num_complex::Complex64;
use rv_root_music::array_model::{synthesize, Scenario, UlaConfig};
use rv_root_music::cli::{sweep_csv, RunConfig};
use rv_root_music::estimator::estimate;
use rv_root_music::experiments::{run_sweep, snr_db_to_noise_power, SweepSpec, SweepVariable};
use rv_root_music::oracles::{
    dual_method_check, extension_identity_checks, first_order_checks, mse_closure_checks,
    parity_checks,
};

fn conclude(criterion: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion}: {status} — {detail}");
    assert!(pass, "{criterion}: {detail}");
}

fn reference_array() -> UlaConfig {
    UlaConfig::new(9, 0.5).unwrap()
}

/// Criterion 1: noiseless exactness of the reference scenario.
#[test]
fn criterion_1_noiseless_exactness() {
    let start = Instant::now();
    let scenario = Scenario::new(reference_array(), vec![30.0, 50.0], 200, 0.0, 7).unwrap();
    let snap = synthesize(&scenario, &mut scenario.trial_rng(0)).unwrap();
    let est = estimate(&snap.observed, 2, &scenario.array).unwrap();
    let err_true = (est.doa.angles_deg[0] - 30.0)
        .abs()
        .max((est.doa.angles_deg[1] - 50.0).abs());
    let err_mirror = (est.doa.mirror_angles_deg[0] + 30.0)
        .abs()
        .max((est.doa.mirror_angles_deg[1] + 50.0).abs());
    let elapsed = start.elapsed();
    conclude(
        "1 (noiseless exactness)",
        err_true < 1e-6 && err_mirror < 1e-6 && elapsed.as_secs_f64() < 1.0,
        &format!(
            "true err {err_true:.2e} deg, mirror err {err_mirror:.2e} deg (tol 1e-6), \
             runtime {:.0} ms (< 1 s)",
            elapsed.as_secs_f64() * 1e3
        ),
    );
}

/// Criterion 2: even arrays always show a real-axis reciprocal pair,
/// odd arrays at capacity never do, over 100 random scenarios per L.
#[test]
fn criterion_2_parity_theorem() {
    let start = Instant::now();
    let checks = parity_checks(100, &[4, 5, 6, 7, 8, 9, 10], 0x34).unwrap();
    let violations: f64 = checks.iter().map(|c| c.measured).sum();
    let elapsed = start.elapsed();
    conclude(
        "2 (real-axis parity)",
        checks.iter().all(|c| c.passed()) && elapsed.as_secs_f64() < 30.0,
        &format!(
            "{violations} violations over 700 scenarios, L in 4..=10, runtime {:.1} s (< 30 s)",
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 3: conjugate-extension identities on 20 random noiseless
/// scenarios.
#[test]
fn criterion_3_extension_equivalence() {
    let start = Instant::now();
    let checks = extension_identity_checks(20, 0xE0).unwrap();
    let elapsed = start.elapsed();
    let detail: Vec<String> = checks
        .iter()
        .map(|c| format!("{:.2e} (tol {:.0e})", c.measured, c.tolerance))
        .collect();
    conclude(
        "3 (extension identities)",
        checks.iter().all(|c| c.passed()) && elapsed.as_secs_f64() < 10.0,
        &format!(
            "identity/angles/singular-values: {}, runtime {:.1} s (< 10 s)",
            detail.join(", "),
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 4: first-order deviation oracle for the true and mirror
/// roots, relative error <= 5% at eps = 1e-5 and monotone in eps.
#[test]
fn criterion_4_first_order_oracle() {
    let start = Instant::now();
    let checks = first_order_checks(0x21).unwrap();
    let elapsed = start.elapsed();
    conclude(
        "4 (first-order deviation)",
        checks.iter().all(|c| c.passed()) && elapsed.as_secs_f64() < 10.0,
        &format!(
            "rel err at 1e-5: true {:.2e}, mirror {:.2e} (tol 5e-2); \
             worst per-decade error ratio: true {:.2e}, mirror {:.2e} (< 1); \
             runtime {:.1} s (< 10 s)",
            checks[0].measured,
            checks[2].measured,
            checks[1].measured,
            checks[3].measured,
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 5: statistical closure of the deviation variance over 1e5
/// Gaussian noise draws, both parameter rows.
#[test]
fn criterion_5_statistical_closure() {
    let start = Instant::now();
    let checks = mse_closure_checks(100_000, 0x39).unwrap();
    let elapsed = start.elapsed();
    conclude(
        "5 (variance closure)",
        checks.iter().all(|c| c.passed()) && elapsed.as_secs_f64() < 60.0,
        &format!(
            "relative gap: true row {:.2e}, mirror row {:.2e} (tol 5e-2), \
             runtime {:.1} s (< 60 s)",
            checks[0].measured,
            checks[1].measured,
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 6: curvature and deflation denominators agree to 1e-6
/// relative for L in 5..=12 and K in {1, 2}.
#[test]
fn criterion_6_dual_method_denominators() {
    let start = Instant::now();
    let check = dual_method_check(5..=12, 0xD0).unwrap();
    let elapsed = start.elapsed();
    conclude(
        "6 (dual-method denominators)",
        check.passed() && elapsed.as_secs_f64() < 10.0,
        &format!(
            "worst disagreement {:.2e} (tol 1e-6), runtime {:.1} s (< 10 s)",
            check.measured,
            elapsed.as_secs_f64()
        ),
    );
}

fn condition_1_spec() -> SweepSpec {
    SweepSpec {
        base: Scenario::new(reference_array(), vec![30.0, 50.0], 200, 0.0, 42).unwrap(),
        sweep_variable: SweepVariable::SnrDb,
        sweep_values: (0..=10).map(|k| 2.0 * k as f64).collect(),
        trials: 1000,
        tracked_source_deg: 30.0,
    }
}

fn condition_2_spec() -> SweepSpec {
    SweepSpec {
        base: Scenario::new(
            reference_array(),
            vec![30.0, 50.0],
            200,
            snr_db_to_noise_power(10.0),
            42,
        )
        .unwrap(),
        sweep_variable: SweepVariable::Snapshots,
        sweep_values: (5..=12).map(|n| f64::from(1u32 << n)).collect(),
        trials: 1000,
        tracked_source_deg: 30.0,
    }
}

/// Criterion 7: RMSE vs SNR, 0..20 dB in 2 dB steps, 200 snapshots,
/// 1000 trials: weakly decreasing RMSE and a theory gap <= 15% from
/// 10 dB up, for the true and mirror curves.
#[test]
fn criterion_7_snr_sweep() {
    let start = Instant::now();
    let spec = condition_1_spec();
    let rows = run_sweep(&spec).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(rows.len(), 11);
    let mut weakly_decreasing = true;
    let mut worst_ratio = 0.0f64;
    for w in rows.windows(2) {
        for (a, b) in [
            (w[0].rmse_true_emp_deg, w[1].rmse_true_emp_deg),
            (w[0].rmse_mirror_emp_deg, w[1].rmse_mirror_emp_deg),
        ] {
            worst_ratio = worst_ratio.max(b / a);
            if b > 1.1 * a {
                weakly_decreasing = false;
            }
        }
    }
    let mut worst_gap = 0.0f64;
    for row in rows.iter().filter(|r| r.sweep_value >= 10.0) {
        worst_gap = worst_gap
            .max((row.rmse_true_emp_deg - row.rmse_true_theory_deg).abs() / row.rmse_true_theory_deg)
            .max(
                (row.rmse_mirror_emp_deg - row.rmse_mirror_theory_deg).abs()
                    / row.rmse_mirror_theory_deg,
            );
    }
    let all_used: usize = rows.iter().map(|r| r.trials_used).sum();
    conclude(
        "7 (RMSE vs SNR)",
        weakly_decreasing && worst_gap <= 0.15 && elapsed.as_secs_f64() < 300.0,
        &format!(
            "11 points x 1000 trials ({all_used} used), worst step ratio {worst_ratio:.3} \
             (<= 1.1), worst theory gap at >= 10 dB: {:.1}% (<= 15%), runtime {:.1} s (< 5 min)",
            worst_gap * 100.0,
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 8: RMSE vs snapshots, M = 2^5..2^12 at 10 dB, 1000
/// trials: strictly decreasing RMSE with diminishing improvement and a
/// theory gap <= 10% at M = 4096.
///
/// "Diminishing improvement" is asserted two ways. The absolute
/// improvement over consecutive two-octave spans must decrease
/// strictly; for the near square-root law here those spans differ by
/// ~4x, far above the Monte Carlo noise. The log-log slope magnitude
/// must also not grow by more than 0.28 per step: the slope of the
/// ideal law is constant at -1/2, and with 1000 trials one slope
/// difference carries a noise standard deviation of
/// sqrt(6) / (sqrt(2*1000) * ln 2) ~ 0.079, so 0.28 is a 3.5-sigma
/// allowance around "not increasing".
#[test]
fn criterion_8_snapshot_sweep() {
    let start = Instant::now();
    let spec = condition_2_spec();
    let rows = run_sweep(&spec).unwrap();
    let elapsed = start.elapsed();
    assert_eq!(rows.len(), 8);
    let rmse: Vec<f64> = rows.iter().map(|r| r.rmse_true_emp_deg).collect();
    let strictly_decreasing = rmse.windows(2).all(|w| w[1] < w[0]);
    // two-octave absolute improvements: 32->128, 128->512, 512->2048
    let improvements = [rmse[0] - rmse[2], rmse[2] - rmse[4], rmse[4] - rmse[6]];
    let improvement_diminishes = improvements.windows(2).all(|w| w[1] < w[0]);
    let slopes: Vec<f64> = rmse
        .windows(2)
        .map(|w| (w[1] / w[0]).log2())
        .collect();
    let slope_margin = 0.28;
    let slope_magnitude_tame = slopes
        .windows(2)
        .all(|w| w[1].abs() <= w[0].abs() + slope_margin);
    let last = rows.last().unwrap();
    let gap_4096 =
        (last.rmse_true_emp_deg - last.rmse_true_theory_deg).abs() / last.rmse_true_theory_deg;
    conclude(
        "8 (RMSE vs snapshots)",
        strictly_decreasing
            && improvement_diminishes
            && slope_magnitude_tame
            && gap_4096 <= 0.10
            && elapsed.as_secs_f64() < 600.0,
        &format!(
            "8 points x 1000 trials, strictly decreasing: {strictly_decreasing}, \
             two-octave improvements {improvements:.4?} diminishing: {improvement_diminishes}, \
             slopes {slopes:.3?} within +{slope_margin}/step, theory gap at M=4096: {:.1}% \
             (<= 10%), runtime {:.1} s (< 10 min)",
            gap_4096 * 100.0,
            elapsed.as_secs_f64()
        ),
    );
}

/// Criterion 9: the sweep CSV bodies of criteria 7 and 8 are
/// byte-identical for any worker count.
#[test]
fn criterion_9_worker_determinism() {
    let start = Instant::now();
    let cfg = RunConfig {
        seed: 42,
        ..RunConfig::default()
    };
    let mut identical = true;
    for spec in [condition_1_spec(), condition_2_spec()] {
        let mut bodies = Vec::new();
        for workers in [1usize, 2] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .unwrap();
            let rows = pool.install(|| run_sweep(&spec)).unwrap();
            bodies.push(sweep_csv(&cfg, &spec, &rows));
        }
        if bodies[0] != bodies[1] {
            identical = false;
        }
    }
    let elapsed = start.elapsed();
    conclude(
        "9 (worker-count determinism)",
        identical,
        &format!(
            "condition 1 and 2 CSV bodies byte-identical across 1 and 2 workers, \
             runtime {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
}
