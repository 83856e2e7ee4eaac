//! Uniform linear array signal model.
//!
//! Builds steering vectors, synthesizes source and noise snapshots, and
//! forms sample covariances and the conventional-beamformer spectrum.
//! Randomness always flows through an explicitly passed generator;
//! experiment code derives one independent stream per trial.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, CVector};

/// Minimum separation (degrees) between any source and broadside, and
/// between any source and the mirror image of another. The mirror-root
/// structure needs span{a(theta_k), a(-theta_k)} to have full dimension
/// 2K, which fails when a source sits at 0 degrees or at the negative
/// of another source.
pub const MIN_ANGLE_SEPARATION_DEG: f64 = 0.1;

/// Array geometry: element count and normalized spacing d/lambda.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaConfig {
    elements: usize,
    spacing_ratio: f64,
}

impl UlaConfig {
    pub fn new(elements: usize, spacing_ratio: f64) -> Result<Self> {
        if elements < 3 {
            return Err(Error::Contract(format!(
                "array needs at least 3 elements, got {elements}"
            )));
        }
        if !(spacing_ratio > 0.0 && spacing_ratio <= 0.5) {
            return Err(Error::Contract(format!(
                "spacing ratio d/lambda must be in (0, 0.5], got {spacing_ratio}"
            )));
        }
        Ok(Self {
            elements,
            spacing_ratio,
        })
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn spacing_ratio(&self) -> f64 {
        self.spacing_ratio
    }
}

/// Full description of one simulated experiment.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub array: UlaConfig,
    pub angles_deg: Vec<f64>,
    pub snapshots: usize,
    pub noise_power: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn new(
        array: UlaConfig,
        angles_deg: Vec<f64>,
        snapshots: usize,
        noise_power: f64,
        seed: u64,
    ) -> Result<Self> {
        let k = angles_deg.len();
        if k == 0 {
            return Err(Error::Contract("scenario needs at least one source".into()));
        }
        let l = array.elements();
        if 2 * k > l - 1 {
            return Err(Error::Contract(format!(
                "{k} sources exceed the capacity of an {l}-element array \
                 (need K <= floor((L-1)/2) so mirror roots fit)"
            )));
        }
        for (i, a) in angles_deg.iter().enumerate() {
            if !(a.abs() < 90.0) {
                return Err(Error::Contract(format!(
                    "source angle {a} out of (-90, 90)"
                )));
            }
            if a.abs() < MIN_ANGLE_SEPARATION_DEG {
                return Err(Error::Contract(format!(
                    "source angle {a} too close to broadside; \
                     the real-valued pipeline needs |theta| >= {MIN_ANGLE_SEPARATION_DEG} deg"
                )));
            }
            for b in angles_deg.iter().skip(i + 1) {
                if (a - b).abs() < MIN_ANGLE_SEPARATION_DEG {
                    return Err(Error::Contract(format!(
                        "source angles {a} and {b} are not distinct"
                    )));
                }
                if (a + b).abs() < MIN_ANGLE_SEPARATION_DEG {
                    return Err(Error::Contract(format!(
                        "source angles {a} and {b} form a mirror pair; \
                         true and mirror roots would coincide"
                    )));
                }
            }
        }
        if snapshots == 0 {
            return Err(Error::Contract("need at least one snapshot".into()));
        }
        if !(noise_power >= 0.0) {
            return Err(Error::Contract(format!(
                "noise power must be >= 0, got {noise_power}"
            )));
        }
        Ok(Self {
            array,
            angles_deg,
            snapshots,
            noise_power,
            seed,
        })
    }

    pub fn num_sources(&self) -> usize {
        self.angles_deg.len()
    }

    /// Dimension of the signal subspace of Re(R_xx). Every valid
    /// scenario keeps sources away from broadside and from each other's
    /// mirrors, so the span of {a(theta_k), a(-theta_k)} is always 2K.
    pub fn signal_dim(&self) -> usize {
        2 * self.num_sources()
    }

    /// Independent, reproducible random stream for one trial. Streams
    /// derived from the same seed but different trial indices never
    /// overlap, so trials can run on any number of workers in any order.
    pub fn trial_rng(&self, trial_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial_index);
        rng
    }
}

/// One synthesized data set: clean snapshots, the noise realization,
/// and their sum (what the estimator sees).
#[derive(Debug, Clone)]
pub struct SnapshotData {
    pub clean: CMatrix,
    pub noise: CMatrix,
    pub observed: CMatrix,
}

/// Steering vector a(theta): element i carries phase
/// exp(-j 2 pi (d/lambda) sin(theta) i), so element 0 is 1.
pub fn steering_vector(array: &UlaConfig, theta_deg: f64) -> Result<CVector> {
    if !(theta_deg.abs() < 90.0) {
        return Err(Error::Domain(format!(
            "steering angle {theta_deg} out of (-90, 90)"
        )));
    }
    let omega = 2.0 * std::f64::consts::PI * array.spacing_ratio() * theta_deg.to_radians().sin();
    Ok(CVector::from_fn(array.elements(), |i, _| {
        Complex64::from_polar(1.0, -omega * i as f64)
    }))
}

fn standard_complex_gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unit-power, mutually independent complex circular Gaussian sources,
/// one row per source. Entries are drawn column by column (snapshot
/// major) so the layout of the stream is fixed.
pub fn generate_sources<R: Rng>(scenario: &Scenario, rng: &mut R) -> CMatrix {
    let k = scenario.num_sources();
    let m = scenario.snapshots;
    let mut s = CMatrix::zeros(k, m);
    for t in 0..m {
        for i in 0..k {
            s[(i, t)] = standard_complex_gaussian(rng);
        }
    }
    s
}

/// I.i.d. complex circular Gaussian noise with per-entry variance
/// `noise_power` (so sigma_n^2 / 2 in each of the real and imaginary
/// parts).
pub fn generate_noise<R: Rng>(
    array: &UlaConfig,
    snapshots: usize,
    noise_power: f64,
    rng: &mut R,
) -> CMatrix {
    let l = array.elements();
    let amp = noise_power.sqrt();
    let mut n = CMatrix::zeros(l, snapshots);
    if noise_power == 0.0 {
        return n;
    }
    for t in 0..snapshots {
        for i in 0..l {
            n[(i, t)] = standard_complex_gaussian(rng) * amp;
        }
    }
    n
}

/// Synthesizes clean snapshots X = A(theta) S plus noise.
pub fn synthesize<R: Rng>(scenario: &Scenario, rng: &mut R) -> Result<SnapshotData> {
    let l = scenario.array.elements();
    let k = scenario.num_sources();
    let mut manifold = CMatrix::zeros(l, k);
    for (col, theta) in scenario.angles_deg.iter().enumerate() {
        manifold.set_column(col, &steering_vector(&scenario.array, *theta)?);
    }
    let sources = generate_sources(scenario, rng);
    let clean = &manifold * sources;
    let noise = generate_noise(&scenario.array, scenario.snapshots, scenario.noise_power, rng);
    let observed = &clean + &noise;
    Ok(SnapshotData {
        clean,
        noise,
        observed,
    })
}

/// Sample covariance (1/M) X X^H.
pub fn sample_covariance(x: &CMatrix) -> CMatrix {
    let m = x.ncols() as f64;
    (x * x.adjoint()) / Complex64::new(m, 0.0)
}

/// Conventional beamformer spectrum |a(theta)^H R a(theta)|^2.
pub fn cbf_spectrum(r: &CMatrix, array: &UlaConfig, theta_deg: f64) -> Result<f64> {
    if r.nrows() != array.elements() || r.ncols() != array.elements() {
        return Err(Error::Contract(format!(
            "covariance is {}x{} but the array has {} elements",
            r.nrows(),
            r.ncols(),
            array.elements()
        )));
    }
    let a = steering_vector(array, theta_deg)?;
    let quad = (a.adjoint() * r * &a)[(0, 0)];
    Ok(quad.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{complex_svd, fro_norm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ula(l: usize) -> UlaConfig {
        UlaConfig::new(l, 0.5).unwrap()
    }

    fn scenario_51(noise_power: f64) -> Scenario {
        Scenario::new(ula(9), vec![30.0, 50.0], 200, noise_power, 7).unwrap()
    }

    #[test]
    fn steering_broadside_is_ones() {
        let a = steering_vector(&ula(6), 0.0).unwrap();
        for v in a.iter() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn steering_30_deg_quarter_turns() {
        // sin 30 = 1/2 => phase step -pi/2: [1, -j, -1, j]
        let a = steering_vector(&ula(4), 30.0).unwrap();
        let expect = [
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, -1.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        for (v, e) in a.iter().zip(expect.iter()) {
            assert!((v - e).norm() < 1e-14);
        }
    }

    #[test]
    fn steering_unit_modulus_constant_step() {
        let a = steering_vector(&ula(9), 50.0).unwrap();
        let step = -std::f64::consts::PI * 50.0f64.to_radians().sin();
        for i in 0..9 {
            assert!((a[i].norm() - 1.0).abs() < 1e-14);
            if i > 0 {
                let diff = (a[i] / a[i - 1]).arg();
                assert!((diff - step).abs() < 1e-12, "step {diff} vs {step}");
            }
        }
        assert!((a[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn steering_conjugation_symmetry() {
        let a = steering_vector(&ula(7), 37.3).unwrap();
        let b = steering_vector(&ula(7), -37.3).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert!((x.conj() - y).norm() < 1e-14);
        }
    }

    #[test]
    fn steering_rejects_endfire() {
        assert!(steering_vector(&ula(4), 90.0).is_err());
        assert!(steering_vector(&ula(4), -95.0).is_err());
    }

    #[test]
    fn sources_unit_power_and_independent() {
        let sc = Scenario::new(ula(5), vec![10.0, 40.0], 1_000_000, 0.0, 3).unwrap();
        let mut rng = sc.trial_rng(0);
        let s = generate_sources(&sc, &mut rng);
        let m = s.ncols() as f64;
        for i in 0..2 {
            let power: f64 = s.row(i).iter().map(|v| v.norm_sqr()).sum::<f64>() / m;
            assert!((power - 1.0).abs() < 0.01, "row {i} power {power}");
        }
        let cross: Complex64 = (0..s.ncols()).map(|t| s[(0, t)] * s[(1, t)].conj()).sum();
        assert!((cross / m).norm() < 0.01);
    }

    #[test]
    fn sources_deterministic_for_fixed_seed() {
        let sc = scenario_51(0.0);
        let a = generate_sources(&sc, &mut sc.trial_rng(4));
        let b = generate_sources(&sc, &mut sc.trial_rng(4));
        assert_eq!(a, b);
        let c = generate_sources(&sc, &mut sc.trial_rng(5));
        assert_ne!(a, c);
    }

    #[test]
    fn noise_moments() {
        let arr = ula(10);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let n = generate_noise(&arr, 100_000, 1.0, &mut rng);
        let count = (n.nrows() * n.ncols()) as f64;
        let var: f64 = n.iter().map(|v| v.norm_sqr()).sum::<f64>() / count;
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
        let re_var: f64 = n.iter().map(|v| v.re * v.re).sum::<f64>() / count;
        let im_var: f64 = n.iter().map(|v| v.im * v.im).sum::<f64>() / count;
        assert!((re_var - 0.5).abs() < 0.01);
        assert!((im_var - 0.5).abs() < 0.01);
    }

    #[test]
    fn zero_noise_power_gives_zero_matrix() {
        let arr = ula(4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = generate_noise(&arr, 16, 0.0, &mut rng);
        assert!(n.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn synthesize_noiseless_observed_equals_clean() {
        let sc = scenario_51(0.0);
        let snap = synthesize(&sc, &mut sc.trial_rng(0)).unwrap();
        assert_eq!(snap.clean, snap.observed);
        assert!(snap.noise.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn synthesize_observed_is_clean_plus_noise() {
        let sc = scenario_51(0.5);
        let snap = synthesize(&sc, &mut sc.trial_rng(2)).unwrap();
        let diff = &snap.observed - (&snap.clean + &snap.noise);
        assert!(fro_norm(&diff) == 0.0);
    }

    #[test]
    fn clean_rank_equals_source_count() {
        let sc = scenario_51(0.0);
        let snap = synthesize(&sc, &mut sc.trial_rng(0)).unwrap();
        let svd = complex_svd(&snap.clean).unwrap();
        let top = svd.singular_values[0];
        assert!(svd.singular_values[1] > 1e-6 * top);
        for w in &svd.singular_values[2..] {
            assert!(*w < 1e-10 * top, "rank exceeded: {w} vs top {top}");
        }
    }

    #[test]
    fn covariance_all_ones() {
        let x = CMatrix::from_element(2, 4, Complex64::new(1.0, 0.0));
        let r = sample_covariance(&x);
        for v in r.iter() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn covariance_single_snapshot() {
        let x = CMatrix::from_fn(3, 1, |i, _| Complex64::new(i as f64, 1.0));
        let r = sample_covariance(&x);
        for i in 0..3 {
            for j in 0..3 {
                let expect = x[(i, 0)] * x[(j, 0)].conj();
                assert!((r[(i, j)] - expect).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn covariance_hermitian_psd() {
        let sc = scenario_51(0.3);
        let snap = synthesize(&sc, &mut sc.trial_rng(1)).unwrap();
        let r = sample_covariance(&snap.observed);
        let herm = &r - r.adjoint();
        assert!(fro_norm(&herm) < 1e-13 * fro_norm(&r));
        let real = crate::numerics::RealSymmetric::new(r.map(|z| z.re)).unwrap();
        let evd = crate::numerics::symmetric_evd(&real).unwrap();
        let trace: f64 = (0..9).map(|i| r[(i, i)].re).sum();
        assert!(*evd.eigenvalues.last().unwrap() >= -1e-10 * trace);
    }

    #[test]
    fn cbf_identity_covariance() {
        let arr = ula(9);
        let r = CMatrix::identity(9, 9);
        let v = cbf_spectrum(&r, &arr, 12.5).unwrap();
        assert!((v - 81.0).abs() < 1e-9, "got {v}"); // (a^H a)^2 = L^2
    }

    #[test]
    fn cbf_rank_one_peak() {
        let arr = ula(9);
        let a = steering_vector(&arr, 30.0).unwrap();
        let r = &a * a.adjoint();
        let v = cbf_spectrum(&r, &arr, 30.0).unwrap();
        assert!((v - 6561.0).abs() < 1e-7, "got {v}"); // (L^2)^2
    }

    #[test]
    fn cbf_separates_true_from_mirror() {
        let sc = scenario_51(0.01); // 20 dB
        let snap = synthesize(&sc, &mut sc.trial_rng(0)).unwrap();
        let r = sample_covariance(&snap.observed);
        let at_true = cbf_spectrum(&r, &sc.array, 30.0).unwrap();
        let at_mirror = cbf_spectrum(&r, &sc.array, -30.0).unwrap();
        assert!(at_true > at_mirror, "{at_true} vs {at_mirror}");
    }

    #[test]
    fn scenario_validation() {
        assert!(Scenario::new(ula(9), vec![], 10, 0.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![95.0], 10, 0.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![0.0], 10, 0.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![30.0, 30.0], 10, 0.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![30.0, -30.0], 10, 0.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![1.0, 2.0, 3.0, 4.0, 5.0], 10, 0.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![30.0], 0, 0.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![30.0], 10, -1.0, 0).is_err());
        assert!(Scenario::new(ula(9), vec![30.0, 50.0], 10, 0.0, 0).is_ok());
    }
}
