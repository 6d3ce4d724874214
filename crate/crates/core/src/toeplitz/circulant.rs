use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operator::{ModelSymbol, ToeplitzOperator};
use crate::error::{Error, Result};
use crate::fft::Transform;

/// Eigenvalues with modulus below this fraction of the largest one make a
/// circulant singular to machine precision.
pub const SINGULAR_REL_TOL: f64 = 1e-13;

/// `C = [c_{(i-j) mod n}]` with cached eigenvalues `lambda = DFT(c)`.
#[derive(Debug, Clone)]
pub struct CirculantMatrix {
    first_column: Vec<f64>,
    eigenvalues: Vec<Complex64>,
    transform: Transform,
    /// Exponent of the l^p fit this circulant came from, if any.
    p: Option<f64>,
}

impl CirculantMatrix {
    pub fn new(first_column: Vec<f64>) -> Result<Self> {
        if first_column.is_empty() {
            return Err(Error::InvalidInput("circulant dimension must be at least 1".into()));
        }
        if first_column.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("circulant entries must be finite".into()));
        }
        let transform = Transform::new(first_column.len());
        let eigenvalues = transform.forward_real(&first_column);
        Ok(Self {
            first_column,
            eigenvalues,
            transform,
            p: None,
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut c = vec![0.0; n];
        if let Some(c0) = c.first_mut() {
            *c0 = 1.0;
        }
        Self::new(c)
    }

    fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn n(&self) -> usize {
        self.first_column.len()
    }

    pub fn first_column(&self) -> &[f64] {
        &self.first_column
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn p(&self) -> Option<f64> {
        self.p
    }

    /// `c_k == c_{n-k}` for all `k`, hence a real spectrum.
    pub fn is_symmetric(&self) -> bool {
        let n = self.n();
        (1..n).all(|k| self.first_column[k] == self.first_column[n - k])
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    /// `SINGULAR_REL_TOL * max |lambda|`.
    pub fn singularity_threshold(&self) -> f64 {
        SINGULAR_REL_TOL * self.max_abs_eigenvalue()
    }

    pub fn is_singular(&self) -> bool {
        self.min_abs_eigenvalue() <= self.singularity_threshold()
    }

    /// Symmetric with every eigenvalue above the singularity threshold.
    pub fn is_positive_definite(&self) -> bool {
        let thr = self.singularity_threshold();
        self.is_symmetric() && self.eigenvalues.iter().all(|z| z.re > thr)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform.forward_in_place(&mut buf);
        buf.iter_mut().zip(&self.eigenvalues).for_each(|(b, l)| *b *= l);
        self.transform.inverse_in_place(&mut buf);
        Ok(buf.into_iter().map(|z| z.re).collect())
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.first_column[(i + n - j) % n])
    }

    /// Circulant with the same eigenvectors and eigenvalues `g(lambda_j)`.
    pub(crate) fn spectral_map(&self, g: impl Fn(f64) -> f64) -> Result<CirculantMatrix> {
        let mapped: Vec<Complex64> = self.eigenvalues.iter().map(|z| Complex64::new(g(z.re), 0.0)).collect();
        let mut col = self.transform.inverse_to_real(&mapped);
        symmetrize(&mut col);
        CirculantMatrix::new(col)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Averages `c_k` and `c_{n-k}` to remove round-off asymmetry.
fn symmetrize(col: &mut [f64]) {
    let n = col.len();
    for k in 1..=n / 2 {
        let v = 0.5 * (col[k] + col[n - k]);
        col[k] = v;
        col[n - k] = v;
    }
}

/// Minimizer of `a_count |a - c|^p + b_count |b - c|^p` over real `c`.
///
/// For `p > 1` it is the weighted mean with weights `count^(1/(p-1))`; for
/// `p = 1` the value with the larger count, `a` on ties.
pub fn weighted_lp_center(a: f64, a_count: f64, b: f64, b_count: f64, p: f64) -> f64 {
    if b_count == 0.0 || a == b {
        return a;
    }
    if a_count == 0.0 {
        return b;
    }
    if p == 1.0 {
        return if a_count >= b_count { a } else { b };
    }
    // canonical order so that swapping the two points is bitwise symmetric
    let (a, a_count, b, b_count) = if a_count < b_count {
        (b, b_count, a, a_count)
    } else {
        (a, a_count, b, b_count)
    };
    let rho = (b_count / a_count).powf(1.0 / (p - 1.0));
    if rho.is_infinite() {
        b
    } else {
        (a + b * rho) / (1.0 + rho)
    }
}

/// Circulant closest to `T` in the entrywise l^p norm.
///
/// Circulant diagonal class `k` meets the Toeplitz offsets `k` (`n - k`
/// entries) and `k - n` (`k` entries), so the objective separates and each
/// `c_k` is a two-point l^p center.
pub fn lp_circulant_minimizer(t: &ToeplitzOperator, p: f64) -> Result<CirculantMatrix> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let n = t.n();
    let c = (0..n)
        .map(|k| {
            let ki = k as i64;
            weighted_lp_center(
                t.coefficient(ki),
                (n - k) as f64,
                t.coefficient(ki - n as i64),
                k as f64,
                p,
            )
        })
        .collect();
    Ok(CirculantMatrix::new(c)?.with_p(p))
}

/// Frobenius-optimal circulant `c_k = ((n-k) t_k + k t_{k-n}) / n`.
pub fn frobenius_circulant(t: &ToeplitzOperator) -> Result<CirculantMatrix> {
    let n = t.n();
    let nf = n as f64;
    let c = (0..n)
        .map(|k| {
            let ki = k as i64;
            ((n - k) as f64 * t.coefficient(ki) + k as f64 * t.coefficient(ki - n as i64)) / nf
        })
        .collect();
    Ok(CirculantMatrix::new(c)?.with_p(2.0))
}

/// Eigenvalue summary of a circulant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirculantSpectrum {
    pub eigenvalues: Vec<Complex64>,
    pub negative_count: usize,
    pub min_real: f64,
    pub max_abs: f64,
}

pub fn circulant_spectrum(c: &CirculantMatrix) -> CirculantSpectrum {
    let eigenvalues = c.eigenvalues().to_vec();
    CirculantSpectrum {
        negative_count: eigenvalues.iter().filter(|z| z.re < 0.0).count(),
        min_real: eigenvalues.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
        max_abs: c.max_abs_eigenvalue(),
        eigenvalues,
    }
}

/// Closed-form spectrum of a symmetric circulant supported on offsets
/// `{0, +-1, +-2}` with `c_0 = phi`:
/// `lambda_j = f(theta_j) + 2 (c_1 - psi) cos theta_j + 2 (c_2 - gamma) cos 2 theta_j`,
/// `theta_j = 2 pi j / n`. Valid for `n >= 5`.
pub fn model_circulant_spectrum(symbol: &ModelSymbol, c1: f64, c2: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n as f64;
            symbol.eval(th) + 2.0 * (c1 - symbol.psi()) * th.cos() + 2.0 * (c2 - symbol.gamma) * (2.0 * th).cos()
        })
        .collect()
}

/// Spectral rule behind [`strang_type_correction`]: eigenvalues at or below
/// `threshold` are replaced by their modulus when that exceeds the threshold,
/// otherwise by the smallest eigenvalue above the threshold.
pub fn correct_spectrum(eigenvalues: &[f64], threshold: f64) -> Result<Vec<f64>> {
    let floor = eigenvalues
        .iter()
        .copied()
        .filter(|&l| l > threshold)
        .fold(f64::INFINITY, f64::min);
    if floor.is_infinite() {
        return Err(Error::Uncorrectable(threshold));
    }
    Ok(eigenvalues
        .iter()
        .map(|&l| {
            if l > threshold {
                l
            } else if l.abs() > threshold {
                l.abs()
            } else {
                floor
            }
        })
        .collect())
}

/// Positive definite circulant obtained by a low-rank spectral fix of `c`.
pub fn strang_type_correction(c: &CirculantMatrix, threshold: f64) -> Result<CirculantMatrix> {
    if !c.is_symmetric() {
        return Err(Error::InvalidInput(
            "spectral correction needs a symmetric circulant".into(),
        ));
    }
    let re: Vec<f64> = c.eigenvalues().iter().map(|z| z.re).collect();
    let fixed = correct_spectrum(&re, threshold)?;
    let spec: Vec<Complex64> = fixed.iter().map(|&l| Complex64::new(l, 0.0)).collect();
    let mut col = c.transform.inverse_to_real(&spec);
    symmetrize(&mut col);
    let mut out = CirculantMatrix::new(col)?;
    // keep the exact corrected values rather than their FFT round trip
    out.eigenvalues = spec;
    out.p = c.p;
    Ok(out)
}

/// Solve `C z = r` by dividing in the Fourier basis.
pub fn circulant_solve(c: &CirculantMatrix, r: &[f64]) -> Result<Vec<f64>> {
    c.check_len(r.len())?;
    if c.is_singular() {
        return Err(Error::PreconditionerSingular {
            min_abs: c.min_abs_eigenvalue(),
            max_abs: c.max_abs_eigenvalue(),
        });
    }
    Ok(apply_inverse(c, r))
}

pub(crate) fn apply_inverse(c: &CirculantMatrix, r: &[f64]) -> Vec<f64> {
    let mut buf: Vec<Complex64> = r.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    c.transform.forward_in_place(&mut buf);
    buf.iter_mut().zip(&c.eigenvalues).for_each(|(b, l)| *b /= l);
    c.transform.inverse_in_place(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}
