//! Monte Carlo harness: per-trial estimation records, SNR and snapshot
//! sweeps, and the root-locus export.
//!
//! Trials draw from independent random streams derived from
//! (scenario seed, trial index), so any number of workers produces the
//! same records. Aggregation always walks the records in trial order,
//! which keeps the output bit-stable across worker counts.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::array_model::{synthesize, Scenario, UlaConfig};
use crate::error::{Error, Result};
use crate::estimator::{estimate, real_axis_pairs, REAL_AXIS_TOL};
use crate::perturbation::{
    conjugate_extend_noise, factor_spectrum, generalized_params, predicted_deviation,
    theoretical_mse, RootKind,
};

/// Estimates farther than this from the tracked source count as gross
/// errors and fail the trial instead of polluting the RMSE.
pub const GATING_WINDOW_DEG: f64 = 10.0;

/// Which scenario field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    SnrDb,
    Snapshots,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::Snapshots => "snapshots",
        }
    }
}

/// Sweep description: a base scenario plus the variable, its values,
/// the trial count and the source whose error is tracked.
#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub base: Scenario,
    pub sweep_variable: SweepVariable,
    pub sweep_values: Vec<f64>,
    pub trials: usize,
    pub tracked_source_deg: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Contract("sweep needs at least one trial".into()));
        }
        if self.sweep_values.is_empty() {
            return Err(Error::Contract("sweep needs at least one value".into()));
        }
        if !self.sweep_values.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Contract(
                "sweep values must be strictly increasing".into(),
            ));
        }
        if self.sweep_variable == SweepVariable::Snapshots {
            for v in &self.sweep_values {
                if v.fract() != 0.0 || *v < 1.0 {
                    return Err(Error::Contract(format!(
                        "snapshot counts must be positive integers, got {v}"
                    )));
                }
            }
        }
        let tracked = self.tracked_source_deg;
        if !self
            .base
            .angles_deg
            .iter()
            .any(|a| (a - tracked).abs() < 1e-9)
        {
            return Err(Error::Contract(format!(
                "tracked source {tracked} deg is not one of the scenario angles"
            )));
        }
        Ok(())
    }

    /// The base scenario with the sweep variable substituted.
    pub fn scenario_at(&self, value: f64) -> Result<Scenario> {
        match self.sweep_variable {
            SweepVariable::SnrDb => Scenario::new(
                self.base.array,
                self.base.angles_deg.clone(),
                self.base.snapshots,
                snr_db_to_noise_power(value),
                self.base.seed,
            ),
            SweepVariable::Snapshots => Scenario::new(
                self.base.array,
                self.base.angles_deg.clone(),
                value as usize,
                self.base.noise_power,
                self.base.seed,
            ),
        }
    }
}

/// Per-source SNR convention: unit source power, so
/// sigma_n^2 = 10^(-SNR/10).
pub fn snr_db_to_noise_power(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

/// Successful trial payload.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub err_true_deg: f64,
    pub err_mirror_deg: f64,
    pub theory_mse_true_rad2: f64,
    pub theory_mse_mirror_rad2: f64,
    pub predicted_dtheta_rad: f64,
    pub predicted_dphi_rad: f64,
}

/// One Monte Carlo trial: either a full record or a counted failure.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub outcome: Option<TrialOutcome>,
}

fn nearest(list: &[f64], target: f64) -> Option<f64> {
    list.iter()
        .copied()
        .min_by(|a, b| (a - target).abs().partial_cmp(&(b - target).abs()).unwrap())
}

/// Runs one trial: synthesizes data from the trial's stream, estimates
/// on the noisy snapshots, measures tracked true/mirror errors with the
/// gating window, and evaluates the first-order prediction and MSE on
/// the trial's noiseless realization with its actual noise draw.
pub fn run_trial(scenario: &Scenario, tracked_source_deg: f64, trial_index: u64) -> TrialRecord {
    let failed = TrialRecord {
        trial_index,
        outcome: None,
    };
    let mut rng = scenario.trial_rng(trial_index);
    let snap = match synthesize(scenario, &mut rng) {
        Ok(s) => s,
        Err(_) => return failed,
    };
    let k = scenario.num_sources();
    let est = match estimate(&snap.observed, k, &scenario.array) {
        Ok(e) => e,
        Err(_) => return failed,
    };
    let theta_hat = match nearest(&est.doa.angles_deg, tracked_source_deg) {
        Some(v) => v,
        None => return failed,
    };
    let phi_hat = match nearest(&est.doa.mirror_angles_deg, -tracked_source_deg) {
        Some(v) => v,
        None => return failed,
    };
    let err_true_deg = theta_hat - tracked_source_deg;
    let err_mirror_deg = phi_hat + tracked_source_deg;
    if err_true_deg.abs() > GATING_WINDOW_DEG || err_mirror_deg.abs() > GATING_WINDOW_DEG {
        return failed;
    }
    // theory side, conditioned on this trial's source realization
    let theory = (|| -> Result<(f64, f64, f64, f64)> {
        let clean_est = estimate(&snap.clean, k, &scenario.array)?;
        let omega = 2.0
            * std::f64::consts::PI
            * scenario.array.spacing_ratio()
            * tracked_source_deg.to_radians().sin();
        let r_k = clean_est
            .roots
            .selected_true
            .iter()
            .chain(clean_est.roots.selected_mirror.iter())
            .min_by(|a, b| {
                (a.arg() - omega)
                    .abs()
                    .partial_cmp(&(b.arg() - omega).abs())
                    .unwrap()
            })
            .copied()
            .ok_or_else(|| Error::Estimation("no tracked root".into()))?;
        let spectrum = factor_spectrum(&clean_est.subspaces, r_k, &scenario.array)?;
        let ext = crate::perturbation::conjugate_extension(&snap.clean, scenario.signal_dim())?;
        let params_t = generalized_params(
            &ext,
            &clean_est.subspaces,
            &spectrum,
            RootKind::True,
            &scenario.array,
            tracked_source_deg,
        )?;
        let params_m = generalized_params(
            &ext,
            &clean_est.subspaces,
            &spectrum,
            RootKind::Mirror,
            &scenario.array,
            tracked_source_deg,
        )?;
        let n_v = conjugate_extend_noise(&snap.noise);
        Ok((
            theoretical_mse(&params_t, scenario.noise_power)?,
            theoretical_mse(&params_m, scenario.noise_power)?,
            predicted_deviation(&params_t, &n_v)?,
            predicted_deviation(&params_m, &n_v)?,
        ))
    })();
    match theory {
        Ok((mse_t, mse_m, dtheta, dphi)) => TrialRecord {
            trial_index,
            outcome: Some(TrialOutcome {
                err_true_deg,
                err_mirror_deg,
                theory_mse_true_rad2: mse_t,
                theory_mse_mirror_rad2: mse_m,
                predicted_dtheta_rad: dtheta,
                predicted_dphi_rad: dphi,
            }),
        },
        Err(_) => failed,
    }
}

/// Aggregated results for one sweep value.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub rmse_true_emp_deg: f64,
    pub rmse_true_theory_deg: f64,
    pub rmse_mirror_emp_deg: f64,
    pub rmse_mirror_theory_deg: f64,
    pub trials_used: usize,
    pub failures: usize,
    /// More than 10% of trials failed at this point.
    pub flagged: bool,
}

/// Runs every sweep point. Trials execute in parallel on the ambient
/// rayon pool; the aggregation order is fixed by trial index.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.sweep_values.len());
    for value in &spec.sweep_values {
        let scenario = spec.scenario_at(*value)?;
        let records: Vec<TrialRecord> = (0..spec.trials as u64)
            .into_par_iter()
            .map(|t| run_trial(&scenario, spec.tracked_source_deg, t))
            .collect();
        rows.push(aggregate(*value, &records, spec.trials));
    }
    Ok(rows)
}

fn aggregate(sweep_value: f64, records: &[TrialRecord], trials: usize) -> SweepRow {
    let mut se_true = 0.0;
    let mut se_mirror = 0.0;
    let mut mse_true = 0.0;
    let mut mse_mirror = 0.0;
    let mut used = 0usize;
    for rec in records {
        if let Some(out) = &rec.outcome {
            se_true += out.err_true_deg * out.err_true_deg;
            se_mirror += out.err_mirror_deg * out.err_mirror_deg;
            mse_true += out.theory_mse_true_rad2;
            mse_mirror += out.theory_mse_mirror_rad2;
            used += 1;
        }
    }
    let failures = trials - used;
    let n = used.max(1) as f64;
    SweepRow {
        sweep_value,
        rmse_true_emp_deg: (se_true / n).sqrt(),
        rmse_true_theory_deg: (mse_true / n).sqrt().to_degrees(),
        rmse_mirror_emp_deg: (se_mirror / n).sqrt(),
        rmse_mirror_theory_deg: (mse_mirror / n).sqrt().to_degrees(),
        trials_used: used,
        failures,
        flagged: failures * 10 > trials,
    }
}

/// Root classes for the locus export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootClass {
    True,
    Mirror,
    Extraneous,
    RealAxis,
}

impl RootClass {
    pub fn name(&self) -> &'static str {
        match self {
            RootClass::True => "true",
            RootClass::Mirror => "mirror",
            RootClass::Extraneous => "extraneous",
            RootClass::RealAxis => "real_axis",
        }
    }
}

#[derive(Debug, Clone)]
pub struct RootPoint {
    pub root: Complex64,
    pub class: RootClass,
}

/// All 2(L-1) noiseless roots with their classification. The noiseless
/// root set depends only on the array and the angles, so the internal
/// source draw is fixed.
pub fn root_locus(array: &UlaConfig, angles_deg: &[f64]) -> Result<Vec<RootPoint>> {
    let scenario = Scenario::new(*array, angles_deg.to_vec(), 64, 0.0, 0xD0A)?;
    let snap = synthesize(&scenario, &mut scenario.trial_rng(0))?;
    let est = estimate(&snap.clean, scenario.num_sources(), array)?;
    let pairs = real_axis_pairs(&est.roots.all_roots);
    let is_real_pair_member = |z: &Complex64| {
        pairs
            .iter()
            .any(|(a, b)| (z.re - a).abs() < 1e-9 * a.abs().max(1.0) || (z.re - b).abs() < 1e-9 * b.abs().max(1.0))
            && z.im.abs() < REAL_AXIS_TOL * z.norm()
    };
    let arg_near = |z: &Complex64, reps: &[Complex64]| {
        reps.iter()
            .any(|r| (z.arg() - r.arg()).abs() < 1e-3 && (1.0 - z.norm()).abs() < 0.5)
    };
    Ok(est
        .roots
        .all_roots
        .iter()
        .map(|z| {
            let class = if is_real_pair_member(z) {
                RootClass::RealAxis
            } else if arg_near(z, &est.roots.selected_true) {
                RootClass::True
            } else if arg_near(z, &est.roots.selected_mirror) {
                RootClass::Mirror
            } else {
                RootClass::Extraneous
            };
            RootPoint { root: *z, class }
        })
        .collect())
}
