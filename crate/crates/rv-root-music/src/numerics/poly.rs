//! Complex polynomials with root finding.
//!
//! Coefficients are stored in ascending powers. Root finding uses
//! companion-matrix eigenvalues (with balancing) when all coefficients
//! are real, and Aberth-Ehrlich simultaneous iteration otherwise. Every
//! reported root is checked against the residual bound
//! |p(r)| <= 1e-8 * max|coeff| * max(1, |r|)^degree.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{COEFF_TRIM_TOL, ROOT_RESIDUAL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPolynomial {
    /// Ascending powers; trailing coefficients below the trim threshold
    /// are removed on construction so the leading coefficient is nonzero.
    coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        let scale = coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()));
        if scale > 0.0 {
            while coeffs.len() > 1
                && coeffs.last().map(|c| c.norm() <= COEFF_TRIM_TOL * scale) == Some(true)
            {
                coeffs.pop();
            }
        }
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    fn max_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |a, c| a.max(c.norm()))
    }

    /// True when every coefficient is real relative to the largest one.
    pub fn is_real(&self) -> bool {
        let scale = self.max_coeff();
        self.coeffs
            .iter()
            .all(|c| c.im.abs() <= COEFF_TRIM_TOL * scale)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Coefficientwise differentiation applied `order` times.
    pub fn derivative(&self, order: u32) -> Result<Self> {
        if order == 0 {
            return Err(Error::Contract("derivative order must be >= 1".into()));
        }
        let mut c = self.coeffs.clone();
        for _ in 0..order {
            if c.len() <= 1 {
                c = vec![Complex64::new(0.0, 0.0)];
                break;
            }
            c = c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, v)| v * k as f64)
                .collect();
        }
        Ok(Self { coeffs: c })
    }

    /// All `degree` roots, with multiplicity.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.degree() == 0 {
            return Err(Error::Domain(
                "cannot extract roots of a degree-0 polynomial".into(),
            ));
        }
        let scale = self.max_coeff();
        // deflate exact zeros at the origin
        let mut lo = 0;
        while lo < self.coeffs.len() - 1 && self.coeffs[lo].norm() <= COEFF_TRIM_TOL * scale {
            lo += 1;
        }
        let mut roots: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); lo];
        let work = &self.coeffs[lo..];
        if work.len() > 1 {
            let found = if self.is_real() {
                companion_roots_real(&work.iter().map(|c| c.re).collect::<Vec<_>>())
            } else {
                aberth_roots(work)?
            };
            roots.extend(found);
        }
        // residual post-condition
        let deg = self.degree();
        for r in &roots {
            let bound = ROOT_RESIDUAL_TOL * scale * r.norm().max(1.0).powi(deg as i32);
            let resid = self.eval(*r).norm();
            if resid > bound {
                return Err(Error::Numerical(format!(
                    "root residual {resid:.3e} exceeds bound {bound:.3e} at z = {r}"
                )));
            }
        }
        Ok(roots)
    }
}

/// Roots of a real-coefficient polynomial via balanced companion-matrix
/// eigenvalues.
fn companion_roots_real(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, n - 1)] = -coeffs[i] / lead;
        if i > 0 {
            m[(i, i - 1)] = 1.0;
        }
    }
    balance_in_place(&mut m);
    let eig = m.complex_eigenvalues();
    eig.iter().map(|z| Complex64::new(z.re, z.im)).collect()
}

/// Parlett-Reinsch balancing by powers of two; leaves eigenvalues exact.
fn balance_in_place(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let radix2 = 4.0f64; // radix^2
    loop {
        let mut converged = true;
        for i in 0..n {
            let mut c: f64 = (0..n).filter(|&j| j != i).map(|j| m[(j, i)].abs()).sum();
            let mut r: f64 = (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum();
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let mut f = 1.0f64;
            let s = c + r;
            while c < r / radix2 {
                f *= 2.0;
                c *= 4.0;
                r /= 4.0;
            }
            while c > r * radix2 {
                f /= 2.0;
                c /= 4.0;
                r *= 4.0;
            }
            if (c + r) < 0.95 * s && f != 1.0 {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
        if converged {
            break;
        }
    }
}

/// Aberth-Ehrlich simultaneous iteration for complex coefficients.
fn aberth_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let deriv: Vec<Complex64> = monic
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, v)| v * k as f64)
        .collect();

    let eval = |c: &[Complex64], z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in c.iter().rev() {
            acc = acc * z + v;
        }
        acc
    };

    // start on a circle inside the Cauchy bound, offset so no guess is real
    let radius = 1.0 + monic[..n].iter().fold(0.0f64, |a, c| a.max(c.norm()));
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.45;
            Complex64::from_polar(0.8 * radius, ang)
        })
        .collect();

    for _ in 0..400 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let pz = eval(&monic, z[i]);
            if pz.norm() == 0.0 {
                continue;
            }
            let dz = eval(&deriv, z[i]);
            let newton = if dz.norm() > 0.0 { pz / dz } else { pz };
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s += (z[i] - z[j]).inv();
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * s;
            let w = if denom.norm() > 0.0 { newton / denom } else { newton };
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            return Ok(z);
        }
    }
    // multiple roots stall above the step tolerance; the residual
    // post-condition in roots() is the real acceptance test
    Ok(z)
}

/// Expands a monic polynomial from its roots (test and oracle helper).
pub fn poly_from_roots(roots: &[Complex64]) -> ComplexPolynomial {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, v) in c.iter().enumerate() {
            next[k + 1] += v;
            next[k] -= v * r;
        }
        c = next;
    }
    ComplexPolynomial::new(c)
}

/// Divides out a linear factor (z - r); returns the quotient, dropping
/// the remainder.
pub fn deflate(p: &ComplexPolynomial, r: Complex64) -> ComplexPolynomial {
    let c = p.coeffs();
    let n = c.len() - 1;
    let mut q = vec![Complex64::new(0.0, 0.0); n];
    let mut carry = c[n];
    for k in (0..n).rev() {
        q[k] = carry;
        carry = c[k] + carry * r;
    }
    ComplexPolynomial::new(q)
}

/// Power vector p(z) = [1, z, z^2, ..., z^(len-1)]^T.
pub fn power_vector(len: usize, z: Complex64) -> crate::numerics::CVector {
    let mut v = crate::numerics::CVector::zeros(len);
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 0..len {
        v[i] = acc;
        acc *= z;
    }
    v
}

/// Elementwise derivative of the power vector:
/// [0, 1, 2z, ..., (len-1) z^(len-2)]^T.
pub fn power_vector_derivative(len: usize, z: Complex64) -> crate::numerics::CVector {
    let mut v = crate::numerics::CVector::zeros(len);
    let mut acc = Complex64::new(1.0, 0.0);
    for i in 1..len {
        v[i] = acc * i as f64;
        acc *= z;
    }
    v
}
