//! Real-valued root-MUSIC pipeline.
//!
//! Real part of the sample covariance, signal/noise subspace split,
//! palindromic rooting polynomial, root classification, angle mapping
//! and CBF mirror filtering.
//!
//! Taking the real part of the covariance folds each steering vector
//! a(theta) together with its conjugate a(-theta), so the signal
//! subspace of Re(R) spans both and has dimension 2K for K sources away
//! from broadside. The subspace split here therefore happens at index
//! 2K, not K, and the polynomial acquires a mirror root at -theta_k for
//! every true root. CBF resolves which member of each pair is real.

use num_complex::Complex64;

use crate::array_model::{cbf_spectrum, UlaConfig};
use crate::error::{Error, Result};
use crate::numerics::{symmetric_evd, CMatrix, ComplexPolynomial, RMatrix, RealSymmetric};

/// |Im z| < REAL_AXIS_TOL * |z| flags a root as real-axis.
pub const REAL_AXIS_TOL: f64 = 1e-6;

/// Roots whose arguments differ by less than this are treated as one
/// physical root (a numerically split double root or a reciprocal
/// partner pair).
pub const CLUSTER_ARG_TOL: f64 = 1e-4;

/// Candidate roots must satisfy |1 - |z|| < UNIT_BAND.
pub const UNIT_BAND: f64 = 0.5;

/// Relative eigengap below which the subspace split gets a warning.
pub const EIGEN_GAP_TOL: f64 = 1e-12;

/// Relative tolerance for the CBF tie check in mirror filtering.
pub const CBF_TIE_TOL: f64 = 1e-12;

/// Signal/noise eigenstructure of the real covariance.
#[derive(Debug, Clone)]
pub struct SubspaceDecomp {
    /// Columns span the signal subspace (dimension 2K for K off-broadside
    /// sources).
    pub signal_basis: RMatrix,
    pub noise_basis: RMatrix,
    pub signal_eigenvalues: Vec<f64>,
    pub noise_eigenvalues: Vec<f64>,
    /// Set when the eigenvalues at the split are nearly degenerate.
    pub gap_warning: bool,
}

impl SubspaceDecomp {
    pub fn order(&self) -> usize {
        self.signal_basis.nrows()
    }

    pub fn signal_dim(&self) -> usize {
        self.signal_basis.ncols()
    }

    /// Noise-subspace projector E_n E_n^T.
    pub fn noise_projector(&self) -> RMatrix {
        &self.noise_basis * self.noise_basis.transpose()
    }
}

/// Rooting outcome with true/mirror/real-axis classification.
#[derive(Debug, Clone)]
pub struct RootDiagnostics {
    pub all_roots: Vec<Complex64>,
    /// One representative per source, positive argument (provisional
    /// "true" label; CBF makes the final call).
    pub selected_true: Vec<Complex64>,
    /// Conjugate partners, index-aligned with `selected_true`.
    pub selected_mirror: Vec<Complex64>,
    /// Real-axis reciprocal pairs as (inner, outer) with |inner| <= 1.
    pub real_axis_pairs: Vec<(f64, f64)>,
    pub leading_coefficient: Complex64,
}

/// Final angle estimates after CBF filtering.
#[derive(Debug, Clone)]
pub struct DoaEstimate {
    /// CBF-selected angles, ascending.
    pub angles_deg: Vec<f64>,
    /// Rejected mirror angles, ordered so mirror_angles_deg[i] pairs
    /// with angles_deg[i].
    pub mirror_angles_deg: Vec<f64>,
    /// All 2K candidates before filtering.
    pub raw_candidates_deg: Vec<f64>,
    /// True when the CBF values at the keep/reject boundary tied.
    pub cbf_ambiguous: bool,
}

/// Everything the pipeline produces for one data matrix.
#[derive(Debug, Clone)]
pub struct Estimate {
    pub doa: DoaEstimate,
    pub subspaces: SubspaceDecomp,
    pub roots: RootDiagnostics,
}

/// Elementwise real part of a Hermitian matrix, symmetrized against
/// rounding. Rejects inputs that are not Hermitian to 1e-12 relative.
pub fn real_covariance(r: &CMatrix) -> Result<RealSymmetric> {
    if r.nrows() != r.ncols() {
        return Err(Error::Contract(format!(
            "covariance must be square, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let n = r.nrows();
    let scale = r.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    for i in 0..n {
        for j in 0..n {
            if (r[(i, j)] - r[(j, i)].conj()).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Contract(format!(
                    "matrix is not Hermitian at ({i},{j})"
                )));
            }
        }
    }
    let mut out = RMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = 0.5 * (r[(i, j)].re + r[(j, i)].re);
        }
    }
    RealSymmetric::new(out)
}

/// Splits the eigenstructure of the real covariance at `signal_dim`
/// (top eigenvalues to the signal side).
pub fn extract_subspaces(r_real: &RealSymmetric, signal_dim: usize) -> Result<SubspaceDecomp> {
    let l = r_real.order();
    if signal_dim == 0 || signal_dim >= l {
        return Err(Error::Contract(format!(
            "signal dimension {signal_dim} must lie in [1, {})",
            l
        )));
    }
    let evd = symmetric_evd(r_real)?;
    let lam_max = evd.eigenvalues[0].abs().max(f64::MIN_POSITIVE);
    let gap = evd.eigenvalues[signal_dim - 1] - evd.eigenvalues[signal_dim];
    let gap_warning = gap < EIGEN_GAP_TOL * lam_max;
    Ok(SubspaceDecomp {
        signal_basis: RMatrix::from(evd.eigenvectors.columns(0, signal_dim)),
        noise_basis: RMatrix::from(evd.eigenvectors.columns(signal_dim, l - signal_dim)),
        signal_eigenvalues: evd.eigenvalues[..signal_dim].to_vec(),
        noise_eigenvalues: evd.eigenvalues[signal_dim..].to_vec(),
        gap_warning,
    })
}

/// q(z) = z^(L-1) p^T(1/z) C p(z) for a real symmetric projector C: the
/// coefficient of z^(L-1+m) is the sum of the m-th diagonal of C, so
/// the coefficients are real and palindromic.
pub fn polynomial_from_projector(c: &RMatrix) -> ComplexPolynomial {
    let l = c.nrows();
    let mut coeffs = vec![0.0f64; 2 * l - 1];
    for m in -(l as isize - 1)..l as isize {
        let mut s = 0.0;
        for a in 0..l {
            let b = a as isize + m;
            if b >= 0 && (b as usize) < l {
                s += c[(a, b as usize)];
            }
        }
        coeffs[(l as isize - 1 + m) as usize] = s;
    }
    ComplexPolynomial::from_real(&coeffs)
}

/// Rooting polynomial of the noise projector.
pub fn build_polynomial(decomp: &SubspaceDecomp) -> ComplexPolynomial {
    polynomial_from_projector(&decomp.noise_projector())
}

/// Detects real-axis roots and groups them into reciprocal (inner,
/// outer) pairs.
pub fn real_axis_pairs(roots: &[Complex64]) -> Vec<(f64, f64)> {
    let mut reals: Vec<f64> = roots
        .iter()
        .filter(|z| z.norm() > 1e-12 && z.im.abs() < REAL_AXIS_TOL * z.norm())
        .map(|z| z.re)
        .collect();
    reals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut used = vec![false; reals.len()];
    let mut pairs = Vec::new();
    for i in 0..reals.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let recip = 1.0 / reals[i];
        let mut best: Option<usize> = None;
        for j in 0..reals.len() {
            if used[j] {
                continue;
            }
            let d = (reals[j] - recip).abs();
            if d < REAL_AXIS_TOL * recip.abs().max(1.0)
                && best.map(|b| d < (reals[b] - recip).abs()) != Some(false)
            {
                best = Some(j);
            }
        }
        let partner = match best {
            Some(j) => {
                used[j] = true;
                reals[j]
            }
            None => recip,
        };
        let (inner, outer) = if reals[i].abs() <= partner.abs() {
            (reals[i], partner)
        } else {
            (partner, reals[i])
        };
        pairs.push((inner, outer));
    }
    pairs
}

/// One cluster of roots sharing an argument.
struct Cluster {
    args: Vec<f64>,
    radii: Vec<f64>,
}

impl Cluster {
    fn representative(&self) -> Complex64 {
        let arg = self.args.iter().sum::<f64>() / self.args.len() as f64;
        let radius = self.radii.iter().sum::<f64>() / self.radii.len() as f64;
        Complex64::from_polar(radius, arg)
    }
}

/// Greedy clustering of candidates ordered by distance to the unit
/// circle. A split double root and the reciprocal partner of a noisy
/// root both land in the cluster of the best member, and the averaged
/// argument cancels the symmetric part of the split.
fn cluster_candidates(mut cands: Vec<Complex64>) -> Vec<Cluster> {
    cands.sort_by(|a, b| {
        let da = (1.0 - a.norm()).abs();
        let db = (1.0 - b.norm()).abs();
        da.partial_cmp(&db).unwrap()
    });
    let mut clusters: Vec<Cluster> = Vec::new();
    for z in cands {
        let arg = z.arg();
        match clusters
            .iter_mut()
            .find(|c| (c.args[0] - arg).abs() < CLUSTER_ARG_TOL)
        {
            Some(c) => {
                c.args.push(arg);
                c.radii.push(z.norm());
            }
            None => clusters.push(Cluster {
                args: vec![arg],
                radii: vec![z.norm()],
            }),
        }
    }
    clusters
}

/// Classifies the 2(L-1) polynomial roots: picks one representative per
/// source on each side of the real axis and detects real-axis pairs.
pub fn classify_roots(
    roots: &[Complex64],
    leading_coefficient: Complex64,
    num_sources: usize,
    array: &UlaConfig,
) -> Result<RootDiagnostics> {
    let l = array.elements();
    if roots.len() != 2 * (l - 1) {
        return Err(Error::Contract(format!(
            "expected {} roots for an {l}-element array, got {}",
            2 * (l - 1),
            roots.len()
        )));
    }
    let pairs = real_axis_pairs(roots);
    let band_count = roots
        .iter()
        .filter(|z| (1.0 - z.norm()).abs() < UNIT_BAND)
        .count();
    if band_count < 2 * num_sources {
        return Err(Error::Estimation(format!(
            "only {band_count} roots near the unit circle; need {}",
            2 * num_sources
        )));
    }
    let complex_in_band = |sign: f64| {
        roots
            .iter()
            .filter(|z| {
                sign * z.im > REAL_AXIS_TOL * z.norm() && (1.0 - z.norm()).abs() < UNIT_BAND
            })
            .copied()
            .collect::<Vec<_>>()
    };
    let pos_clusters = cluster_candidates(complex_in_band(1.0));
    let neg_clusters = cluster_candidates(complex_in_band(-1.0));
    if pos_clusters.len() < num_sources || neg_clusters.len() < num_sources {
        return Err(Error::Estimation(format!(
            "found {} positive-arg and {} negative-arg root groups; need {num_sources} each",
            pos_clusters.len(),
            neg_clusters.len()
        )));
    }
    let selected_true: Vec<Complex64> = pos_clusters[..num_sources]
        .iter()
        .map(|c| c.representative())
        .collect();
    let neg_reps: Vec<Complex64> = neg_clusters.iter().map(|c| c.representative()).collect();
    let mut selected_mirror = Vec::with_capacity(num_sources);
    for zt in &selected_true {
        let best = neg_reps
            .iter()
            .min_by(|a, b| {
                let da = (a.arg() + zt.arg()).abs();
                let db = (b.arg() + zt.arg()).abs();
                da.partial_cmp(&db).unwrap()
            })
            .copied()
            .expect("nonempty by the cluster-count check");
        selected_mirror.push(best);
    }
    Ok(RootDiagnostics {
        all_roots: roots.to_vec(),
        selected_true,
        selected_mirror,
        real_axis_pairs: pairs,
        leading_coefficient,
    })
}

/// Maps unit-circle roots to angles: theta = arcsin(arg(z) / (2 pi d/lambda)).
pub fn roots_to_angles(roots: &[Complex64], array: &UlaConfig) -> Result<Vec<f64>> {
    let scale = 2.0 * std::f64::consts::PI * array.spacing_ratio();
    roots
        .iter()
        .map(|z| {
            let s = z.arg() / scale;
            if s.abs() > 1.0 + 1e-9 {
                return Err(Error::Domain(format!(
                    "root argument {} maps outside the visible region (grating lobe)",
                    z.arg()
                )));
            }
            Ok(s.clamp(-1.0, 1.0).asin().to_degrees())
        })
        .collect()
}

/// CBF split of the 2K candidates into kept and rejected halves.
#[derive(Debug, Clone)]
pub struct MirrorFilter {
    pub kept: Vec<f64>,
    /// Ordered so rejected[i] is the mirror of kept[i].
    pub rejected: Vec<f64>,
    pub ambiguous: bool,
}

/// Keeps the K candidates with the largest CBF values. A tie at the
/// boundary keeps the positive-angle member and flags the result.
pub fn filter_mirrors(
    candidates_deg: &[f64],
    r: &CMatrix,
    array: &UlaConfig,
    num_sources: usize,
) -> Result<MirrorFilter> {
    if candidates_deg.len() != 2 * num_sources {
        return Err(Error::Contract(format!(
            "expected {} candidates, got {}",
            2 * num_sources,
            candidates_deg.len()
        )));
    }
    let values: Vec<f64> = candidates_deg
        .iter()
        .map(|a| cbf_spectrum(r, array, *a))
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..candidates_deg.len()).collect();
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap());
    let vmax = values[order[0]].max(f64::MIN_POSITIVE);
    let boundary_tie =
        (values[order[num_sources - 1]] - values[order[num_sources]]).abs() <= CBF_TIE_TOL * vmax;
    if boundary_tie {
        let keep_idx = order[num_sources - 1];
        let drop_idx = order[num_sources];
        if candidates_deg[keep_idx] < 0.0 && candidates_deg[drop_idx] > 0.0 {
            order.swap(num_sources - 1, num_sources);
        }
    }
    let mut kept: Vec<f64> = order[..num_sources]
        .iter()
        .map(|&i| candidates_deg[i])
        .collect();
    let mut rest: Vec<f64> = order[num_sources..]
        .iter()
        .map(|&i| candidates_deg[i])
        .collect();
    kept.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut rejected = Vec::with_capacity(rest.len());
    for k in &kept {
        let (pos, _) = rest
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a + k).abs().partial_cmp(&(*b + k).abs()).unwrap())
            .expect("kept and rejected have equal length");
        rejected.push(rest.remove(pos));
    }
    Ok(MirrorFilter {
        kept,
        rejected,
        ambiguous: boundary_tie,
    })
}

/// Full pipeline: covariance, real part, subspaces, rooting,
/// classification, angle mapping and CBF filtering.
pub fn estimate(x_til: &CMatrix, num_sources: usize, array: &UlaConfig) -> Result<Estimate> {
    let l = array.elements();
    if x_til.nrows() != l {
        return Err(Error::Contract(format!(
            "data has {} rows but the array has {l} elements",
            x_til.nrows()
        )));
    }
    if x_til.ncols() == 0 {
        return Err(Error::Contract("need at least one snapshot".into()));
    }
    if num_sources == 0 || 2 * num_sources > l - 1 {
        return Err(Error::Contract(format!(
            "source count {num_sources} outside [1, floor((L-1)/2)] for L = {l}"
        )));
    }
    let r = crate::array_model::sample_covariance(x_til);
    let r_real = real_covariance(&r)?;
    let decomp = extract_subspaces(&r_real, 2 * num_sources)?;
    let q = build_polynomial(&decomp);
    let roots = q.roots()?;
    let leading = *q.coeffs().last().expect("nonempty");
    let diag = classify_roots(&roots, leading, num_sources, array)?;
    let true_angles = roots_to_angles(&diag.selected_true, array)?;
    let mirror_angles = roots_to_angles(&diag.selected_mirror, array)?;
    let mut raw = true_angles;
    raw.extend(mirror_angles);
    let mf = filter_mirrors(&raw, &r, array, num_sources)?;
    Ok(Estimate {
        doa: DoaEstimate {
            angles_deg: mf.kept,
            mirror_angles_deg: mf.rejected,
            raw_candidates_deg: raw,
            cbf_ambiguous: mf.ambiguous,
        },
        subspaces: decomp,
        roots: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::{sample_covariance, synthesize, Scenario};
    use crate::numerics::poly::power_vector;

    fn ula(l: usize) -> UlaConfig {
        UlaConfig::new(l, 0.5).unwrap()
    }

    fn noiseless(l: usize, angles: &[f64], seed: u64) -> (Scenario, CMatrix) {
        let sc = Scenario::new(ula(l), angles.to_vec(), 200, 0.0, seed).unwrap();
        let snap = synthesize(&sc, &mut sc.trial_rng(0)).unwrap();
        (sc, snap.observed)
    }

    fn subspaces_of(x: &CMatrix, signal_dim: usize) -> SubspaceDecomp {
        let r_real = real_covariance(&sample_covariance(x)).unwrap();
        extract_subspaces(&r_real, signal_dim).unwrap()
    }

    fn circle_root(theta_deg: f64) -> Complex64 {
        Complex64::from_polar(
            1.0,
            std::f64::consts::PI * theta_deg.to_radians().sin(),
        )
    }

    #[test]
    fn real_covariance_identity() {
        let r = CMatrix::identity(3, 3);
        let s = real_covariance(&r).unwrap();
        assert_eq!(s.matrix(), &RMatrix::identity(3, 3));
    }

    #[test]
    fn real_covariance_kills_imaginary_part() {
        let mut r = CMatrix::identity(2, 2);
        r[(0, 1)] = Complex64::new(0.0, 1.0);
        r[(1, 0)] = Complex64::new(0.0, -1.0);
        let s = real_covariance(&r).unwrap();
        assert_eq!(s.matrix(), &RMatrix::identity(2, 2));
    }

    #[test]
    fn real_covariance_rejects_non_hermitian() {
        let mut r = CMatrix::identity(2, 2);
        r[(0, 1)] = Complex64::new(0.5, 0.0);
        assert!(real_covariance(&r).is_err());
    }

    #[test]
    fn noiseless_real_covariance_has_2k_significant_eigenvalues() {
        let (_, x) = noiseless(9, &[30.0, 50.0], 7);
        let r_real = real_covariance(&sample_covariance(&x)).unwrap();
        let evd = symmetric_evd(&r_real).unwrap();
        let top = evd.eigenvalues[0];
        for lam in &evd.eigenvalues[..4] {
            assert!(*lam > 1e-6 * top, "signal eigenvalue too small: {lam}");
        }
        for lam in &evd.eigenvalues[4..] {
            assert!(lam.abs() < 1e-10 * top, "noise eigenvalue too large: {lam}");
        }
        // a split at K = 2 would leave signal power in the noise block;
        // the pipeline splits at 2K
        let by_k = extract_subspaces(&r_real, 2).unwrap();
        assert!(by_k.noise_eigenvalues[0] > 1e-6 * top);
    }

    #[test]
    fn noise_basis_orthogonal_to_signal_roots() {
        let (_, x) = noiseless(9, &[30.0, 50.0], 7);
        let decomp = subspaces_of(&x, 4);
        let en = crate::numerics::to_complex(&decomp.noise_basis);
        for theta in [30.0, 50.0] {
            let p = power_vector(9, circle_root(theta));
            let pn = en.adjoint() * &p;
            let norm = pn.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm < 1e-8, "E_n^T p({theta}) = {norm}");
        }
    }

    #[test]
    fn degenerate_eigengap_warns_but_succeeds() {
        let r = RealSymmetric::new(RMatrix::identity(6, 6)).unwrap();
        let decomp = extract_subspaces(&r, 2).unwrap();
        assert!(decomp.gap_warning);
        let (_, x) = noiseless(9, &[30.0, 50.0], 3);
        let clean = subspaces_of(&x, 4);
        assert!(!clean.gap_warning);
    }

    #[test]
    fn subspace_basis_orthonormal() {
        let (_, x) = noiseless(9, &[30.0, 50.0], 3);
        let decomp = subspaces_of(&x, 4);
        let mut full = RMatrix::zeros(9, 9);
        full.view_mut((0, 0), (9, 4)).copy_from(&decomp.signal_basis);
        full.view_mut((0, 4), (9, 5)).copy_from(&decomp.noise_basis);
        let gram_err = (full.transpose() * &full - RMatrix::identity(9, 9))
            .iter()
            .fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(gram_err < 1e-10);
    }

    #[test]
    fn polynomial_identity_projector() {
        let q = polynomial_from_projector(&RMatrix::identity(5, 5));
        // only the main diagonal contributes: q = 5 z^4
        assert_eq!(q.degree(), 4);
        assert!((q.coeffs()[4] - Complex64::new(5.0, 0.0)).norm() < 1e-15);
        for c in &q.coeffs()[..4] {
            assert!(c.norm() < 1e-15);
        }
    }

    #[test]
    fn polynomial_single_corner_entry() {
        let mut c = RMatrix::zeros(3, 3);
        c[(0, 0)] = 1.0;
        let q = polynomial_from_projector(&c);
        assert_eq!(q.degree(), 2);
        assert!((q.coeffs()[2] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn polynomial_real_palindromic_and_vanishes_at_roots() {
        let (_, x) = noiseless(9, &[30.0, 50.0], 7);
        let decomp = subspaces_of(&x, 4);
        let q = build_polynomial(&decomp);
        assert_eq!(q.degree(), 16);
        let scale = q.coeffs().iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let n = q.degree();
        for k in 0..=n {
            let c = q.coeffs()[k];
            let c_rev = q.coeffs()[n - k];
            assert!(c.im.abs() <= 1e-12 * scale, "imag coefficient {c}");
            assert!((c - c_rev).norm() <= 1e-12 * scale, "palindrome broken at {k}");
        }
        for theta in [30.0, 50.0, -30.0, -50.0] {
            let z = circle_root(theta);
            assert!(q.eval(z).norm() < 1e-10 * scale, "q not zero at {theta}");
        }
    }

    #[test]
    fn classify_noiseless_roots_at_exact_angles() {
        let (_, x) = noiseless(9, &[30.0, 50.0], 7);
        let decomp = subspaces_of(&x, 4);
        let q = build_polynomial(&decomp);
        let roots = q.roots().unwrap();
        let diag = classify_roots(&roots, *q.coeffs().last().unwrap(), 2, &ula(9)).unwrap();
        let w30 = std::f64::consts::PI * 30.0f64.to_radians().sin();
        let w50 = std::f64::consts::PI * 50.0f64.to_radians().sin();
        let mut args: Vec<f64> = diag.selected_true.iter().map(|z| z.arg()).collect();
        args.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((args[0] - w30).abs() < 1e-8, "{} vs {w30}", args[0]);
        assert!((args[1] - w50).abs() < 1e-8, "{} vs {w50}", args[1]);
        let mut margs: Vec<f64> = diag.selected_mirror.iter().map(|z| z.arg()).collect();
        margs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((margs[0] + w50).abs() < 1e-8);
        assert!((margs[1] + w30).abs() < 1e-8);
    }

    #[test]
    fn root_multiset_closed_under_conj_and_reciprocal() {
        let (_, x) = noiseless(7, &[20.0, 55.0], 5);
        let decomp = subspaces_of(&x, 4);
        let roots = build_polynomial(&decomp).roots().unwrap();
        for z in &roots {
            let conj_dist = roots.iter().map(|w| (w - z.conj()).norm()).fold(f64::MAX, f64::min);
            assert!(conj_dist < 1e-6, "conjugate of {z} missing");
            let recip = z.conj().inv();
            let recip_dist = roots.iter().map(|w| (w - recip).norm()).fold(f64::MAX, f64::min);
            assert!(recip_dist < 1e-6 * recip.norm().max(1.0), "reciprocal of {z} missing");
        }
    }

    #[test]
    fn even_array_has_real_axis_pair() {
        // frozen from the exact noise projector of the 8-element array
        // with sources at 30 and 50 degrees
        let (_, x) = noiseless(8, &[30.0, 50.0], 9);
        let decomp = subspaces_of(&x, 4);
        let roots = build_polynomial(&decomp).roots().unwrap();
        let pairs = real_axis_pairs(&roots);
        assert_eq!(pairs.len(), 1);
        let (inner, outer) = pairs[0];
        assert!((inner - (-0.185835119144454)).abs() < 1e-9, "inner {inner}");
        assert!((outer - (-5.381114208142097)).abs() < 1e-7, "outer {outer}");
        assert!((inner * outer - 1.0).abs() < 1e-9);
    }

    #[test]
    fn odd_array_at_capacity_has_no_real_axis_pair() {
        let (_, x) = noiseless(9, &[15.0, 30.0, 45.0, 60.0], 11);
        let decomp = subspaces_of(&x, 8);
        let roots = build_polynomial(&decomp).roots().unwrap();
        assert!(real_axis_pairs(&roots).is_empty());
    }

    #[test]
    fn odd_array_below_capacity_can_still_have_real_extraneous_roots() {
        // with only 2 of 4 possible sources, the 9-element array's
        // extraneous roots do land on the real axis for this angle pair
        let (_, x) = noiseless(9, &[30.0, 50.0], 7);
        let decomp = subspaces_of(&x, 4);
        let roots = build_polynomial(&decomp).roots().unwrap();
        let pairs = real_axis_pairs(&roots);
        assert_eq!(pairs.len(), 2);
        let mut inners: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        inners.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((inners[0] - (-0.528209392008777)).abs() < 1e-9);
        assert!((inners[1] - 0.584414379380623).abs() < 1e-9);
    }

    #[test]
    fn roots_to_angles_basics() {
        let arr = ula(6);
        let angles = roots_to_angles(
            &[
                Complex64::new(1.0, 0.0),
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
                circle_root(-50.0),
            ],
            &arr,
        )
        .unwrap();
        assert!(angles[0].abs() < 1e-12);
        assert!((angles[1] - 30.0).abs() < 1e-12);
        assert!((angles[2] + 50.0).abs() < 1e-9);
    }

    #[test]
    fn roots_to_angles_grating_lobe() {
        let arr = UlaConfig::new(4, 0.25).unwrap();
        // arg = pi maps to sin(theta) = 2 for quarter-wavelength spacing
        let r = vec![Complex64::from_polar(1.0, 3.0)];
        assert!(matches!(roots_to_angles(&r, &arr), Err(Error::Domain(_))));
    }

    #[test]
    fn filter_keeps_true_angles_at_20db() {
        let sc = Scenario::new(ula(9), vec![30.0, 50.0], 200, 0.01, 7).unwrap();
        let snap = synthesize(&sc, &mut sc.trial_rng(0)).unwrap();
        let r = sample_covariance(&snap.observed);
        let cands = vec![29.98, 50.02, -29.98, -50.02];
        let mf = filter_mirrors(&cands, &r, &sc.array, 2).unwrap();
        assert_eq!(mf.kept, vec![29.98, 50.02]);
        assert_eq!(mf.rejected, vec![-29.98, -50.02]);
        assert!(!mf.ambiguous);
    }

    #[test]
    fn filter_follows_cbf_for_negative_source() {
        let sc = Scenario::new(ula(9), vec![-40.0], 200, 0.0, 13).unwrap();
        let snap = synthesize(&sc, &mut sc.trial_rng(0)).unwrap();
        let r = sample_covariance(&snap.observed);
        let mf = filter_mirrors(&[40.0, -40.0], &r, &sc.array, 1).unwrap();
        assert_eq!(mf.kept, vec![-40.0]);
        assert_eq!(mf.rejected, vec![40.0]);
    }

    #[test]
    fn filter_partition_is_complete() {
        let sc = Scenario::new(ula(9), vec![30.0, 50.0], 100, 0.1, 21).unwrap();
        let snap = synthesize(&sc, &mut sc.trial_rng(3)).unwrap();
        let r = sample_covariance(&snap.observed);
        let cands = vec![30.5, 49.5, -30.5, -49.5];
        let mf = filter_mirrors(&cands, &r, &sc.array, 2).unwrap();
        assert_eq!(mf.kept.len(), 2);
        let mut all: Vec<f64> = mf.kept.iter().chain(mf.rejected.iter()).copied().collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = cands.clone();
        expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(all, expect);
    }

    #[test]
    fn estimate_noiseless_is_exact() {
        let (sc, x) = noiseless(9, &[30.0, 50.0], 7);
        let est = estimate(&x, 2, &sc.array).unwrap();
        assert!((est.doa.angles_deg[0] - 30.0).abs() < 1e-6);
        assert!((est.doa.angles_deg[1] - 50.0).abs() < 1e-6);
        assert!((est.doa.mirror_angles_deg[0] + 30.0).abs() < 1e-6);
        assert!((est.doa.mirror_angles_deg[1] + 50.0).abs() < 1e-6);
        for a in &est.doa.angles_deg {
            assert!(est.doa.raw_candidates_deg.iter().any(|c| c == a));
        }
    }

    #[test]
    fn estimate_noiseless_exact_for_various_arrays() {
        for l in [5usize, 6, 7, 8, 9, 10, 11, 12] {
            for angles in [vec![-25.0_f64], vec![18.0, -47.0]] {
                let (sc, x) = noiseless(l, &angles, 100 + l as u64);
                let est = estimate(&x, angles.len(), &sc.array).unwrap();
                let mut expect = angles.clone();
                expect.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (got, want) in est.doa.angles_deg.iter().zip(expect.iter()) {
                    assert!(
                        (got - want).abs() < 1e-6,
                        "L={l}: got {got}, want {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn estimate_survives_moderate_noise() {
        let sc = Scenario::new(ula(9), vec![30.0, 50.0], 200, 0.1, 41).unwrap();
        let snap = synthesize(&sc, &mut sc.trial_rng(0)).unwrap();
        let est = estimate(&snap.observed, 2, &sc.array).unwrap();
        assert!((est.doa.angles_deg[0] - 30.0).abs() < 2.0);
        assert!((est.doa.angles_deg[1] - 50.0).abs() < 2.0);
    }

    #[test]
    fn estimate_rejects_bad_source_count() {
        let (sc, x) = noiseless(9, &[30.0, 50.0], 7);
        assert!(estimate(&x, 0, &sc.array).is_err());
        assert!(estimate(&x, 5, &sc.array).is_err());
    }
}
