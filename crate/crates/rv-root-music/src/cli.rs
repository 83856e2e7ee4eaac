//! Command-line front end: configuration resolution, experiment
//! dispatch and CSV export.
//!
//! Configuration comes from an optional flat key = value file plus
//! command-line overrides (flags win). Output files are written to a
//! temporary sibling and renamed into place, so failures never leave a
//! partial file. Every float in CSV output is printed with 9
//! significant digits, and rows are aggregated in trial order, which
//! makes re-runs with the same seed byte-identical regardless of the
//! worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::array_model::Scenario;
use crate::error::{Error, Result};
use crate::estimator::RootDiagnostics;
use crate::experiments::{
    root_locus, run_sweep, snr_db_to_noise_power, SweepRow, SweepSpec, SweepVariable,
    GATING_WINDOW_DEG,
};
use crate::oracles::{run_suite, VerifyLevel};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Fully resolved run configuration. Defaults describe the reference
/// scenario: a 9-element half-wavelength array with sources at 30 and
/// 50 degrees, 200 snapshots.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub elements: usize,
    pub spacing: f64,
    pub angles_deg: Vec<f64>,
    pub snapshots: usize,
    pub snr_db: Option<SnrSpec>,
    pub noise_power: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub sweep_variable: Option<SweepVariable>,
    pub sweep_values: Option<Vec<f64>>,
    pub tracked_source_deg: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            elements: 9,
            spacing: 0.5,
            angles_deg: vec![30.0, 50.0],
            snapshots: 200,
            snr_db: None,
            noise_power: None,
            seed: 0,
            trials: 1000,
            sweep_variable: None,
            sweep_values: None,
            tracked_source_deg: None,
            out: None,
            workers: None,
        }
    }
}

/// An SNR argument: either one value or a start:step:stop range.
#[derive(Debug, Clone, PartialEq)]
pub enum SnrSpec {
    Single(f64),
    Range { start: f64, step: f64, stop: f64 },
}

impl SnrSpec {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = text.split(':').collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{s}' is not a number"))
        };
        match parts.as_slice() {
            [one] => Ok(SnrSpec::Single(num(one)?)),
            [start, step, stop] => {
                let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
                if step <= 0.0 {
                    return Err(format!("SNR range step must be positive, got {step}"));
                }
                if stop < start {
                    return Err(format!("SNR range stop {stop} below start {start}"));
                }
                Ok(SnrSpec::Range { start, step, stop })
            }
            _ => Err(format!(
                "'{text}' is not an SNR value or start:step:stop range"
            )),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            SnrSpec::Single(v) => vec![*v],
            SnrSpec::Range { start, step, stop } => {
                let mut out = Vec::new();
                let mut k = 0u32;
                loop {
                    let v = start + step * k as f64;
                    if v > stop + 1e-9 {
                        break;
                    }
                    out.push(v);
                    k += 1;
                }
                out
            }
        }
    }
}

/// Unset fields fall through to the defaults or to the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub elements: Option<usize>,
    pub spacing: Option<f64>,
    pub angles_deg: Option<Vec<f64>>,
    pub snapshots: Option<usize>,
    pub snr: Option<SnrSpec>,
    pub noise_power: Option<f64>,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub sweep_variable: Option<SweepVariable>,
    pub sweep_values: Option<Vec<f64>>,
    pub tracked_source_deg: Option<f64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

/// Resolves the final configuration: defaults, then the config file,
/// then command-line overrides.
pub fn resolve_config(overrides: &Overrides) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &overrides.config {
        apply_config_file(&mut cfg, path)?;
    }
    let o = overrides;
    if let Some(v) = o.elements {
        cfg.elements = v;
    }
    if let Some(v) = o.spacing {
        cfg.spacing = v;
    }
    if let Some(v) = &o.angles_deg {
        cfg.angles_deg = v.clone();
    }
    if let Some(v) = o.snapshots {
        cfg.snapshots = v;
    }
    if let Some(v) = &o.snr {
        cfg.snr_db = Some(v.clone());
    }
    if let Some(v) = o.noise_power {
        cfg.noise_power = Some(v);
    }
    if let Some(v) = o.seed {
        cfg.seed = v;
    }
    if let Some(v) = o.trials {
        cfg.trials = v;
    }
    if let Some(v) = o.sweep_variable {
        cfg.sweep_variable = Some(v);
    }
    if let Some(v) = &o.sweep_values {
        cfg.sweep_values = Some(v.clone());
    }
    if let Some(v) = o.tracked_source_deg {
        cfg.tracked_source_deg = Some(v);
    }
    if let Some(v) = &o.out {
        cfg.out = Some(v.clone());
    }
    if let Some(v) = o.workers {
        cfg.workers = Some(v);
    }
    Ok(cfg)
}

fn apply_config_file(cfg: &mut RunConfig, path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::Config(format!("cannot read config file {}: {e}", path.display()))
    })?;
    let loc = |line: usize| format!("{}:{}", path.display(), line + 1);
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("{}: expected 'key = value', got '{line}'", loc(i)))
        })?;
        let key = key.trim();
        let value = value.trim();
        let bad = |what: &str| Error::Config(format!("{}: invalid {what} '{value}'", loc(i)));
        match key {
            "elements" => cfg.elements = value.parse().map_err(|_| bad("element count"))?,
            "spacing" => cfg.spacing = value.parse().map_err(|_| bad("spacing ratio"))?,
            "angles" => cfg.angles_deg = parse_f64_list(value).map_err(|_| bad("angle list"))?,
            "snapshots" => cfg.snapshots = value.parse().map_err(|_| bad("snapshot count"))?,
            "snr" => {
                cfg.snr_db = Some(SnrSpec::parse(value).map_err(|e| {
                    Error::Config(format!("{}: invalid snr: {e}", loc(i)))
                })?)
            }
            "noise_power" => {
                cfg.noise_power = Some(value.parse().map_err(|_| bad("noise power"))?)
            }
            "seed" => cfg.seed = value.parse().map_err(|_| bad("seed"))?,
            "trials" => cfg.trials = value.parse().map_err(|_| bad("trial count"))?,
            "sweep_variable" => {
                cfg.sweep_variable = Some(match value {
                    "snr_db" => SweepVariable::SnrDb,
                    "snapshots" => SweepVariable::Snapshots,
                    _ => {
                        return Err(Error::Config(format!(
                            "{}: sweep_variable must be 'snr_db' or 'snapshots', got '{value}'",
                            loc(i)
                        )))
                    }
                })
            }
            "sweep_values" => {
                cfg.sweep_values = Some(parse_f64_list(value).map_err(|_| bad("value list"))?)
            }
            "tracked_source_deg" => {
                cfg.tracked_source_deg = Some(value.parse().map_err(|_| bad("angle"))?)
            }
            "out" => cfg.out = Some(PathBuf::from(value)),
            "workers" => cfg.workers = Some(value.parse().map_err(|_| bad("worker count"))?),
            "format" => {
                if value != "csv" {
                    return Err(Error::Config(format!(
                        "{}: only the csv format is supported, got '{value}'",
                        loc(i)
                    )));
                }
            }
            _ => {
                return Err(Error::Config(format!(
                    "{}: unknown config key '{key}'",
                    loc(i)
                )))
            }
        }
    }
    Ok(())
}

pub fn parse_f64_list(text: &str) -> std::result::Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("'{}' is not a number", s.trim()))
        })
        .collect()
}

/// Noise power from the config: explicit noise_power wins over the SNR
/// convention sigma_n^2 = 10^(-snr/10); absent both, noiseless.
fn resolve_noise_power(cfg: &RunConfig) -> Result<f64> {
    if let Some(p) = cfg.noise_power {
        return Ok(p);
    }
    match &cfg.snr_db {
        None => Ok(0.0),
        Some(SnrSpec::Single(v)) => Ok(snr_db_to_noise_power(*v)),
        Some(SnrSpec::Range { .. }) => Err(Error::Config(
            "an SNR range only makes sense for the sweep command".into(),
        )),
    }
}

pub fn build_scenario(cfg: &RunConfig) -> Result<Scenario> {
    let array = crate::array_model::UlaConfig::new(cfg.elements, cfg.spacing)
        .map_err(|e| Error::Config(e.to_string()))?;
    Scenario::new(
        array,
        cfg.angles_deg.clone(),
        cfg.snapshots,
        resolve_noise_power(cfg)?,
        cfg.seed,
    )
    .map_err(|e| Error::Config(e.to_string()))
}

pub fn build_sweep_spec(cfg: &RunConfig) -> Result<SweepSpec> {
    let (variable, values) = match (cfg.sweep_variable, &cfg.sweep_values, &cfg.snr_db) {
        (Some(var), Some(vals), _) => (var, vals.clone()),
        (Some(SweepVariable::SnrDb), None, Some(spec)) => (SweepVariable::SnrDb, spec.values()),
        (None, _, Some(spec @ SnrSpec::Range { .. })) => (SweepVariable::SnrDb, spec.values()),
        (Some(var), None, _) => {
            return Err(Error::Config(format!(
                "sweep over {} needs sweep_values",
                var.name()
            )))
        }
        _ => {
            return Err(Error::Config(
                "sweep needs either an SNR range (--snr start:step:stop) or \
                 sweep_variable + sweep_values"
                    .into(),
            ))
        }
    };
    let array = crate::array_model::UlaConfig::new(cfg.elements, cfg.spacing)
        .map_err(|e| Error::Config(e.to_string()))?;
    let base_noise = match variable {
        SweepVariable::SnrDb => 0.0, // substituted per sweep point
        SweepVariable::Snapshots => resolve_noise_power(cfg)?,
    };
    let base = Scenario::new(
        array,
        cfg.angles_deg.clone(),
        cfg.snapshots,
        base_noise,
        cfg.seed,
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let tracked = cfg.tracked_source_deg.unwrap_or(cfg.angles_deg[0]);
    let spec = SweepSpec {
        base,
        sweep_variable: variable,
        sweep_values: values,
        trials: cfg.trials,
        tracked_source_deg: tracked,
    };
    spec.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(spec)
}

/// 9-significant-digit float formatting for CSV output.
pub fn fmt9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Writes through a temporary sibling and renames into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
            std::process::id()
        )),
        None => PathBuf::from(format!(".out.tmp-{}", std::process::id())),
    };
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn run_with_workers<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

fn meta_header(title: &str, cfg: &RunConfig, extra: &[String]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# rv-root-music {title} v{VERSION}");
    let _ = writeln!(s, "# seed = {}", cfg.seed);
    let _ = writeln!(s, "# elements = {}", cfg.elements);
    let _ = writeln!(s, "# spacing_ratio = {}", cfg.spacing);
    let _ = writeln!(
        s,
        "# angles_deg = {}",
        cfg.angles_deg
            .iter()
            .map(|a| a.to_string())
            .collect::<Vec<_>>()
            .join(",")
    );
    for line in extra {
        let _ = writeln!(s, "# {line}");
    }
    s
}

/// Serializable mirror of the root diagnostics for --json-roots.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct RootsJson {
    pub leading_coefficient: [f64; 2],
    pub all_roots: Vec<[f64; 2]>,
    pub selected_true: Vec<[f64; 2]>,
    pub selected_mirror: Vec<[f64; 2]>,
    pub real_axis_pairs: Vec<[f64; 2]>,
}

impl RootsJson {
    pub fn from_diagnostics(diag: &RootDiagnostics) -> Self {
        let pair = |z: &num_complex::Complex64| [z.re, z.im];
        Self {
            leading_coefficient: pair(&diag.leading_coefficient),
            all_roots: diag.all_roots.iter().map(pair).collect(),
            selected_true: diag.selected_true.iter().map(pair).collect(),
            selected_mirror: diag.selected_mirror.iter().map(pair).collect(),
            real_axis_pairs: diag.real_axis_pairs.iter().map(|(a, b)| [*a, *b]).collect(),
        }
    }
}

/// `estimate`: synthesize the configured scenario (trial stream 0),
/// run the estimator and print the angles.
pub fn cmd_estimate (
    cfg: &RunConfig,
    json_roots: bool,
    details: bool,
    out: &mut impl std::io::Write,
) -> Result<()> {
    let scenario = build_scenario(cfg)?;
    let snap = crate::array_model::synthesize(&scenario, &mut scenario.trial_rng(0))?;
    let est = run_with_workers(cfg.workers, || {
        crate::estimator::estimate(&snap.observed, scenario.num_sources(), &scenario.array)
    })??;
    let join = |v: &[f64]| {
        v.iter()
            .map(|a| format!("{a:.6}"))
            .collect::<Vec<_>>()
            .join(", ")
    };
    writeln!(out, "estimated DOAs (deg): {}", join(&est.doa.angles_deg))?;
    writeln!(out, "mirror DOAs (deg): {}", join(&est.doa.mirror_angles_deg))?;
    if est.doa.cbf_ambiguous {
        writeln!(out, "warning: CBF tie at the keep/reject boundary")?;
    }
    if details {
        let eig: Vec<String> = est
            .subspaces
            .signal_eigenvalues
            .iter()
            .chain(est.subspaces.noise_eigenvalues.iter())
            .map(|v| fmt9(*v))
            .collect();
        writeln!(out, "eigenvalues: {}", eig.join(", "))?;
        if est.subspaces.gap_warning {
            writeln!(out, "warning: near-degenerate eigengap at the subspace split")?;
        }
        writeln!(out, "roots (re, im, |z|):")?;
        for z in &est.roots.all_roots {
            writeln!(out, "  {}, {}, {}", fmt9(z.re), fmt9(z.im), fmt9(z.norm()))?;
        }
        for (a, b) in &est.roots.real_axis_pairs {
            writeln!(out, "real-axis pair: ({}, {})", fmt9(*a), fmt9(*b))?;
        }
    }
    if json_roots {
        let json = serde_json::to_string_pretty(&RootsJson::from_diagnostics(&est.roots))
            .expect("serialization of plain floats");
        writeln!(out, "{json}")?;
    }
    Ok(())
}

/// CSV body for a sweep result.
pub fn sweep_csv(cfg: &RunConfig, spec: &SweepSpec, rows: &[SweepRow]) -> String {
    let mut extra = vec![
        format!("trials = {}", spec.trials),
        format!("tracked_source_deg = {}", spec.tracked_source_deg),
        "snr_convention = unit source power, sigma_n^2 = 10^(-snr_db/10)".to_string(),
        format!("gating_window_deg = {GATING_WINDOW_DEG}"),
        "theory = noiseless-realization MSE per trial, averaged over successful trials"
            .to_string(),
    ];
    match spec.sweep_variable {
        SweepVariable::SnrDb => extra.push(format!("snapshots = {}", spec.base.snapshots)),
        SweepVariable::Snapshots => {
            extra.push(format!("noise_power = {}", spec.base.noise_power))
        }
    }
    let mut s = meta_header("sweep", cfg, &extra);
    s.push_str(
        "sweep_variable,sweep_value,rmse_true_emp_deg,rmse_true_theory_deg,\
         rmse_mirror_emp_deg,rmse_mirror_theory_deg,trials_used,failures\n",
    );
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            spec.sweep_variable.name(),
            fmt9(row.sweep_value),
            fmt9(row.rmse_true_emp_deg),
            fmt9(row.rmse_true_theory_deg),
            fmt9(row.rmse_mirror_emp_deg),
            fmt9(row.rmse_mirror_theory_deg),
            row.trials_used,
            row.failures
        );
    }
    s
}

/// `sweep`: run the configured Monte Carlo sweep and write the CSV.
pub fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let spec = build_sweep_spec(cfg)?;
    let out_path = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("sweep needs an output path (--out)".into()))?;
    let rows = run_with_workers(cfg.workers, || run_sweep(&spec))??;
    for row in &rows {
        if row.flagged {
            eprintln!(
                "warning: {} = {} lost {} of {} trials to gross errors",
                spec.sweep_variable.name(),
                row.sweep_value,
                row.failures,
                spec.trials
            );
        }
    }
    write_atomic(&out_path, &sweep_csv(cfg, &spec, &rows))
}

/// CSV body for the root-locus export.
pub fn roots_csv(cfg: &RunConfig, points: &[crate::experiments::RootPoint]) -> String {
    let extra = vec!["unit_circle_reference = |z| = 1".to_string()];
    let mut s = meta_header("roots", cfg, &extra);
    s.push_str("re,im,class\n");
    for p in points {
        let _ = writeln!(s, "{},{},{}", fmt9(p.root.re), fmt9(p.root.im), p.class.name());
    }
    s
}

/// `roots`: noiseless root locus of the configured array, as CSV.
pub fn cmd_roots(cfg: &RunConfig) -> Result<()> {
    let out_path = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Config("roots needs an output path (--out)".into()))?;
    let array = crate::array_model::UlaConfig::new(cfg.elements, cfg.spacing)
        .map_err(|e| Error::Config(e.to_string()))?;
    let points = root_locus(&array, &cfg.angles_deg)?;
    write_atomic(&out_path, &roots_csv(cfg, &points))
}

/// `verify`: run the oracle suites, print one line per check.
pub fn cmd_verify(
    level: VerifyLevel,
    workers: Option<usize>,
    out: &mut impl std::io::Write,
) -> Result<()> {
    let checks = run_with_workers(workers, || run_suite(level))??;
    let mut failures = 0;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{status} {} | measured {:.3e} tolerance {:.3e}",
            c.name, c.measured, c.tolerance
        )?;
        if !c.passed() {
            failures += 1;
        }
    }
    writeln!(out, "{} of {} checks passed", checks.len() - failures, checks.len())?;
    if failures > 0 {
        return Err(Error::Verification(format!("{failures} oracle checks failed")));
    }
    Ok(())
}

/// Process exit code for an error, per the documented convention:
/// 1 usage/config, 2 estimation/numerical, 3 verification, 4 I/O.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Contract(_) | Error::Domain(_) => 1,
        Error::Estimation(_)
        | Error::Numerical(_)
        | Error::Inconsistency(_)
        | Error::TheoremViolation(_) => 2,
        Error::Verification(_) => 3,
        Error::Io(_) => 4,
    }
}
