//! First-order perturbation analysis of the estimator.
//!
//! Predicts how much each true root and mirror root moves under a given
//! additive-noise realization, and the mean-square error of those
//! deviations under the Gaussian noise model. All quantities derive
//! from the noiseless data: the conjugate-extended matrix X_v = [X X*]
//! supplies the same subspaces as the eigendecomposition of Re(R), and
//! the deviation of a root follows from the noise-subspace perturbation
//! through the factored rooting polynomial.
//!
//! The true-root and mirror-root deviations share one generalized form
//!     delta = -Im(beta^H N_v^H alpha) / gamma
//! with (alpha, beta, gamma) evaluated at the root or at its conjugate.
//! gamma is the curvature of the spectrum at the root; it is computed
//! from the closed form -r^2 f''(r)/2 and cross-checked by deflating
//! the root pair out of the polynomial, which catches roots that are
//! not actually double.

use num_complex::Complex64;

use crate::array_model::UlaConfig;
use crate::error::{Error, Result};
use crate::estimator::{build_polynomial, real_axis_pairs, RootDiagnostics, SubspaceDecomp};
use crate::numerics::poly::{deflate, power_vector, power_vector_derivative};
use crate::numerics::{CMatrix, CVector, ComplexPolynomial, RMatrix, RealSymmetric};

/// Relative agreement required between the two denominator routes.
pub const DUAL_METHOD_TOL: f64 = 1e-6;

/// Relative bound on the imaginary part of gamma.
pub const GAMMA_IMAG_TOL: f64 = 1e-8;

/// Relative rank threshold for the signal singular values.
pub const RANK_TOL: f64 = 1e-12;

/// Thin decomposition of the conjugate-extended data X_v = [X X*].
///
/// X_v X_v^H = 2 Re(X X^H) is real symmetric, so the left singular
/// vectors are real and coincide with the eigenvectors of the real
/// covariance; the singular values satisfy W^2 = 2M Lambda. The
/// decomposition is built from that identity, which keeps U real by
/// construction and conforms with the real noise basis downstream.
#[derive(Debug, Clone)]
pub struct ConjugateExtension {
    pub x_v: CMatrix,
    /// Real left singular vectors spanning the signal subspace (L x d).
    pub u_s: RMatrix,
    /// Signal singular values, descending.
    pub w_s: Vec<f64>,
    /// Right singular vectors (2M x d).
    pub v_s: CMatrix,
    /// Real basis of the noise subspace (L x (L-d)).
    pub u_n: RMatrix,
}

/// Builds [X | X*] and its thin signal decomposition, splitting at
/// `signal_dim`.
pub fn conjugate_extension(x: &CMatrix, signal_dim: usize) -> Result<ConjugateExtension> {
    let l = x.nrows();
    let m = x.ncols();
    if signal_dim == 0 || signal_dim >= l {
        return Err(Error::Contract(format!(
            "signal dimension {signal_dim} must lie in [1, {l})"
        )));
    }
    let x_v = CMatrix::from_fn(l, 2 * m, |i, j| {
        if j < m {
            x[(i, j)]
        } else {
            x[(i, j - m)].conj()
        }
    });
    // X_v X_v^H = 2 Re(X X^H), exactly
    let g2 = (x * x.adjoint()).map(|z| z.re) * 2.0;
    let gram = RealSymmetric::new((&g2 + g2.transpose()) * 0.5)?;
    let evd = crate::numerics::symmetric_evd(&gram)?;
    let lam_max = evd.eigenvalues[0].max(f64::MIN_POSITIVE);
    if evd.eigenvalues[signal_dim - 1] <= RANK_TOL * lam_max {
        return Err(Error::Numerical(format!(
            "signal subspace is rank deficient: eigenvalue {} of {} is {:.3e} vs top {:.3e}",
            signal_dim, l, evd.eigenvalues[signal_dim - 1], lam_max
        )));
    }
    let u_s = RMatrix::from(evd.eigenvectors.columns(0, signal_dim));
    let u_n = RMatrix::from(evd.eigenvectors.columns(signal_dim, l - signal_dim));
    let w_s: Vec<f64> = evd.eigenvalues[..signal_dim]
        .iter()
        .map(|lam| lam.max(0.0).sqrt())
        .collect();
    // V_s = X_v^H U_s W_s^{-1}
    let mut v_s = x_v.adjoint() * crate::numerics::to_complex(&u_s);
    for (col, w) in w_s.iter().enumerate() {
        let inv = Complex64::new(1.0 / w, 0.0);
        v_s.column_mut(col).apply(|z| *z *= inv);
    }
    Ok(ConjugateExtension {
        x_v,
        u_s,
        w_s,
        v_s,
        u_n,
    })
}

/// First-order noise-subspace perturbation
/// Delta E_n = -U_s W_s^{-1} V_s^H N_v^H U_n for N_v = [N N*].
pub fn noise_subspace_perturbation(ext: &ConjugateExtension, n_v: &CMatrix) -> Result<RMatrix> {
    if n_v.nrows() != ext.u_s.nrows() || n_v.ncols() != ext.x_v.ncols() {
        return Err(Error::Contract(format!(
            "noise block is {}x{}, expected {}x{}",
            n_v.nrows(),
            n_v.ncols(),
            ext.u_s.nrows(),
            ext.x_v.ncols()
        )));
    }
    let w_min = ext.w_s.iter().copied().fold(f64::MAX, f64::min);
    let w_max = ext.w_s.iter().copied().fold(0.0f64, f64::max);
    if !(w_min > RANK_TOL * w_max.max(f64::MIN_POSITIVE)) {
        return Err(Error::Numerical(
            "signal singular values are rank deficient; cannot invert W_s".into(),
        ));
    }
    // -U_s W^{-1} (V_s^H (N_v^H U_n))
    let t = n_v.adjoint() * crate::numerics::to_complex(&ext.u_n);
    let mut t = ext.v_s.adjoint() * t;
    for (row, w) in ext.w_s.iter().enumerate() {
        let inv = Complex64::new(1.0 / w, 0.0);
        t.row_mut(row).apply(|z| *z *= inv);
    }
    let delta = -(crate::numerics::to_complex(&ext.u_s) * t);
    let re_norm = delta.iter().map(|z| z.re * z.re).sum::<f64>().sqrt();
    let im_norm = delta.iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    if im_norm > 1e-8 * re_norm.max(f64::MIN_POSITIVE) && im_norm > 1e-14 {
        return Err(Error::Contract(format!(
            "noise-subspace perturbation came out complex (|Im| = {im_norm:.3e}); \
             the noise block must have the [N N*] structure"
        )));
    }
    Ok(delta.map(|z| z.re))
}

/// Factored view of the rooting polynomial around one source.
#[derive(Debug, Clone)]
pub struct FactoredSpectrum {
    pub q: ComplexPolynomial,
    /// Unit-circle root for the source.
    pub r_true: Complex64,
    pub r_mirror: Complex64,
    /// A K_m(r) G(r): curvature at the true root with the real-axis
    /// pair contribution divided out.
    pub denom_true: Complex64,
    /// A K_t(r*) G(r*).
    pub denom_mirror: Complex64,
    /// Product of R(a) = a^2 - 2 a Re(r) + 1 over detected real-axis
    /// pairs; 1 when the array has an odd element count.
    pub correction: f64,
}

/// -r^2 f''(r) / 2 with f(z) = z^{-(L-1)} q(z). At a double root of f
/// this equals the product of the remaining factors.
pub fn second_derivative_denominator(
    q: &ComplexPolynomial,
    r: Complex64,
    l: usize,
) -> Result<Complex64> {
    let n = (l - 1) as f64;
    let q1 = q.derivative(1)?;
    let q2 = q1.derivative(1)?;
    let rq = q.eval(r);
    let rq1 = q1.eval(r);
    let rq2 = q2.eval(r);
    let rinv = r.inv();
    let rp = |e: f64| rinv.powf(e);
    let f2 = rq2 * rp(n) - rq1 * rp(n + 1.0) * (2.0 * n) + rq * rp(n + 2.0) * (n * (n + 1.0));
    Ok(-r * r * f2 * 0.5)
}

/// Same quantity by deflating the two roots nearest r out of q and
/// evaluating the quotient: q(z)/(z - r)^2 -> Q(r), then restoring the
/// (1 - r/z)(1 - z/r) = -(z - r)^2/(r z) normalization of the pair
/// factor.
pub fn deflation_denominator(
    q: &ComplexPolynomial,
    roots: &[Complex64],
    r: Complex64,
    l: usize,
) -> Result<Complex64> {
    if roots.len() < 2 {
        return Err(Error::Contract("need at least two roots to deflate".into()));
    }
    let mut idx: Vec<usize> = (0..roots.len()).collect();
    idx.sort_by(|&i, &j| {
        (roots[i] - r)
            .norm()
            .partial_cmp(&(roots[j] - r).norm())
            .unwrap()
    });
    let mut quot = deflate(q, roots[idx[0]]);
    quot = deflate(&quot, roots[idx[1]]);
    let n = (l - 1) as i32;
    Ok(-r.powi(2 - n) * quot.eval(r))
}

/// Correction factor for real-axis root pairs: the product of
/// R(a) = a^2 - 2 a Re(r_k) + 1 over the inner members of the detected
/// pairs. R(a) is unchanged by r_k -> r_k* since only Re(r_k) enters.
pub fn even_array_correction(diag: &RootDiagnostics, r_k: Complex64) -> Result<f64> {
    if diag.real_axis_pairs.is_empty() {
        return Err(Error::TheoremViolation(
            "even-element array produced no real-axis root pair".into(),
        ));
    }
    Ok(diag
        .real_axis_pairs
        .iter()
        .map(|(a, _)| a * a - 2.0 * a * r_k.re + 1.0)
        .product())
}

fn correction_from_pairs(pairs: &[(f64, f64)], r: Complex64, l: usize) -> Result<f64> {
    if l % 2 == 1 {
        return Ok(1.0);
    }
    if pairs.is_empty() {
        return Err(Error::TheoremViolation(format!(
            "{l}-element array produced no real-axis root pair"
        )));
    }
    Ok(pairs
        .iter()
        .map(|(a, _)| a * a - 2.0 * a * r.re + 1.0)
        .product())
}

/// Computes both denominators at the source root `r_k` (projected onto
/// the unit circle) and its conjugate, each by the closed form and the
/// deflation route.
pub fn factor_spectrum(
    decomp: &SubspaceDecomp,
    r_k: Complex64,
    array: &UlaConfig,
) -> Result<FactoredSpectrum> {
    let l = array.elements();
    if decomp.order() != l {
        return Err(Error::Contract(format!(
            "subspace order {} does not match the {l}-element array",
            decomp.order()
        )));
    }
    let q = build_polynomial(decomp);
    let scale = q.coeffs().iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let resid = q.eval(r_k).norm();
    let bound = 1e-8 * scale * r_k.norm().max(1.0).powi(q.degree() as i32);
    if resid > bound {
        return Err(Error::Contract(format!(
            "r_k is not a root of the spectrum polynomial: residual {resid:.3e} > {bound:.3e}"
        )));
    }
    let roots = q.roots()?;
    let r = Complex64::from_polar(1.0, r_k.arg());
    let denom_of = |point: Complex64| -> Result<Complex64> {
        let d2 = second_derivative_denominator(&q, point, l)?;
        let dd = deflation_denominator(&q, &roots, point, l)?;
        let rel = (d2 - dd).norm() / d2.norm().max(f64::MIN_POSITIVE);
        if rel > DUAL_METHOD_TOL {
            return Err(Error::Inconsistency(format!(
                "denominator methods disagree by {rel:.3e} at z = {point}; \
                 the root there is not a clean double root"
            )));
        }
        Ok(d2)
    };
    let full_true = denom_of(r)?;
    let full_mirror = denom_of(r.conj())?;
    let pairs = real_axis_pairs(&roots);
    let correction = correction_from_pairs(&pairs, r, l)?;
    Ok(FactoredSpectrum {
        q,
        r_true: r,
        r_mirror: r.conj(),
        denom_true: full_true / correction,
        denom_mirror: full_mirror / correction,
        correction,
    })
}

/// Which root of the pair a parameter set describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RootKind {
    True,
    Mirror,
}

/// The (alpha, beta, gamma) triple of the generalized deviation form,
/// plus the angle scale C_k.
#[derive(Debug, Clone)]
pub struct GeneralizedParams {
    pub alpha: CVector,
    pub beta: CVector,
    pub gamma: f64,
    /// C_k = 1 / (2 pi (d/lambda) cos theta_k), radians per radian.
    pub scale_c: f64,
}

/// Assembles the deviation parameters for one root:
/// alpha = E_n E_n^T p'(r) C_k r, beta = V_s W_s^{-1} U_s^H p(r),
/// gamma the matching curvature (correction restored for even arrays).
pub fn generalized_params(
    ext: &ConjugateExtension,
    decomp: &SubspaceDecomp,
    spectrum: &FactoredSpectrum,
    kind: RootKind,
    array: &UlaConfig,
    theta_deg: f64,
) -> Result<GeneralizedParams> {
    let l = array.elements();
    let (r, denom) = match kind {
        RootKind::True => (spectrum.r_true, spectrum.denom_true),
        RootKind::Mirror => (spectrum.r_mirror, spectrum.denom_mirror),
    };
    let gamma_c = denom * spectrum.correction;
    if gamma_c.im.abs() > GAMMA_IMAG_TOL * gamma_c.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "gamma has a non-negligible imaginary part: {gamma_c}"
        )));
    }
    let scale_c =
        1.0 / (2.0 * std::f64::consts::PI * array.spacing_ratio() * theta_deg.to_radians().cos());
    let p1 = power_vector_derivative(l, r);
    let en = crate::numerics::to_complex(&decomp.noise_basis);
    let alpha = (&en * (en.adjoint() * p1)) * (r * scale_c);
    let p = power_vector(l, r);
    let mut coeffs = crate::numerics::to_complex(&ext.u_s).adjoint() * p;
    for (row, w) in ext.w_s.iter().enumerate() {
        coeffs[row] /= w;
    }
    let beta = &ext.v_s * coeffs;
    Ok(GeneralizedParams {
        alpha,
        beta,
        gamma: gamma_c.re,
        scale_c,
    })
}

/// delta = -Im(beta^H N_v^H alpha) / gamma, in radians.
pub fn predicted_deviation(params: &GeneralizedParams, n_v: &CMatrix) -> Result<f64> {
    if n_v.nrows() != params.alpha.len() || n_v.ncols() != params.beta.len() {
        return Err(Error::Contract(format!(
            "noise block is {}x{}, expected {}x{}",
            n_v.nrows(),
            n_v.ncols(),
            params.alpha.len(),
            params.beta.len()
        )));
    }
    let w = n_v.adjoint() * &params.alpha;
    let s = params.beta.dotc(&w);
    Ok(-s.im / params.gamma)
}

/// ||alpha||^2 ||beta||^2 sigma_n^2 / (2 gamma^2), in radians squared.
pub fn theoretical_mse(params: &GeneralizedParams, noise_power: f64) -> Result<f64> {
    if !(noise_power >= 0.0) {
        return Err(Error::Contract(format!(
            "noise power must be >= 0, got {noise_power}"
        )));
    }
    let a2 = params.alpha.iter().map(|z| z.norm_sqr()).sum::<f64>();
    let b2 = params.beta.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok(a2 * b2 * noise_power / (2.0 * params.gamma * params.gamma))
}

/// Per-source prediction record.
#[derive(Debug, Clone)]
pub struct SourceDeviation {
    pub angle_deg: f64,
    pub predicted_dtheta_rad: f64,
    pub predicted_dphi_rad: f64,
    pub theoretical_mse_true_rad2: f64,
    pub theoretical_mse_mirror_rad2: f64,
}

/// Predictions for every source of a scenario under one noise draw.
#[derive(Debug, Clone)]
pub struct PerturbationReport {
    pub per_source: Vec<SourceDeviation>,
}

/// Builds the full prediction report for a scenario. The noiseless
/// quantities are evaluated on the source realization of trial stream 0;
/// `n_v` must be the conjugate-extended noise block [N N*] for an L x M
/// noise draw.
pub fn full_report(scenario: &crate::array_model::Scenario, n_v: &CMatrix) -> Result<PerturbationReport> {
    let snap = crate::array_model::synthesize(
        &noiseless_copy(scenario)?,
        &mut scenario.trial_rng(0),
    )?;
    report_for_clean(scenario, &snap.clean, n_v)
}

fn noiseless_copy(scenario: &crate::array_model::Scenario) -> Result<crate::array_model::Scenario> {
    crate::array_model::Scenario::new(
        scenario.array,
        scenario.angles_deg.clone(),
        scenario.snapshots,
        0.0,
        scenario.seed,
    )
}

/// Prediction report for an explicit noiseless realization.
pub fn report_for_clean(
    scenario: &crate::array_model::Scenario,
    clean: &CMatrix,
    n_v: &CMatrix,
) -> Result<PerturbationReport> {
    let array = &scenario.array;
    let k = scenario.num_sources();
    let est = crate::estimator::estimate(clean, k, array)?;
    let ext = conjugate_extension(clean, scenario.signal_dim())?;
    let omega_of = |theta_deg: f64| {
        2.0 * std::f64::consts::PI * array.spacing_ratio() * theta_deg.to_radians().sin()
    };
    let mut per_source = Vec::with_capacity(k);
    for theta in &scenario.angles_deg {
        let w = omega_of(*theta);
        let candidates = est
            .roots
            .selected_true
            .iter()
            .chain(est.roots.selected_mirror.iter());
        let r_k = candidates
            .min_by(|a, b| {
                (a.arg() - w)
                    .abs()
                    .partial_cmp(&(b.arg() - w).abs())
                    .unwrap()
            })
            .copied()
            .ok_or_else(|| Error::Estimation("no root matched the source".into()))?;
        let spectrum = factor_spectrum(&est.subspaces, r_k, array)?;
        let params_t =
            generalized_params(&ext, &est.subspaces, &spectrum, RootKind::True, array, *theta)?;
        let params_m = generalized_params(
            &ext,
            &est.subspaces,
            &spectrum,
            RootKind::Mirror,
            array,
            *theta,
        )?;
        per_source.push(SourceDeviation {
            angle_deg: *theta,
            predicted_dtheta_rad: predicted_deviation(&params_t, n_v)?,
            predicted_dphi_rad: predicted_deviation(&params_m, n_v)?,
            theoretical_mse_true_rad2: theoretical_mse(&params_t, scenario.noise_power)?,
            theoretical_mse_mirror_rad2: theoretical_mse(&params_m, scenario.noise_power)?,
        });
    }
    Ok(PerturbationReport { per_source })
}

/// [N | N*] for an L x M noise draw.
pub fn conjugate_extend_noise(n: &CMatrix) -> CMatrix {
    let l = n.nrows();
    let m = n.ncols();
    CMatrix::from_fn(l, 2 * m, |i, j| {
        if j < m {
            n[(i, j)]
        } else {
            n[(i, j - m)].conj()
        }
    })
}
