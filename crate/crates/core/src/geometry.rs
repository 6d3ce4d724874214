//! Weak inner products, angles and orthogonality in discrete L^p spaces.
//!
//! Integrals are replaced by uniformly weighted sums and the dual element of
//! `f` is taken to be the L^p duality map `sign(f)|f|^(p-1)` (for complex
//! samples `f|f|^(p-2)`, with `0 -> 0`). For `p = 1` this is the pointwise
//! sign, for `p = 2` the identity, so the weak inner product reduces to the
//! classical one in L^2 and to `(|f+g|_1 - |f|_1 - |g|_1) / 2` in L^1.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Neg};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default tolerance for [`is_orthogonal`].
pub const DEFAULT_ORTHO_TOL: f64 = 1e-10;

/// Scalar sample type a [`DiscreteFunction`] can hold.
pub trait Sample: Copy + Add<Output = Self> + Neg<Output = Self> + Send + Sync {
    fn modulus(self) -> f64;
    /// Image under the L^p duality map.
    fn dual(self, p: f64) -> Self;
    /// `Re(self * conj(other))`.
    fn pair(self, other: Self) -> f64;
    fn is_finite(self) -> bool;
}

impl Sample for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }

    #[inline]
    fn dual(self, p: f64) -> f64 {
        if self == 0.0 {
            0.0
        } else if p == 1.0 {
            self.signum()
        } else if p == 2.0 {
            self
        } else {
            self.signum() * self.abs().powf(p - 1.0)
        }
    }

    #[inline]
    fn pair(self, other: f64) -> f64 {
        self * other
    }

    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Sample for Complex64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }

    #[inline]
    fn dual(self, p: f64) -> Complex64 {
        let r = self.norm();
        if r == 0.0 {
            Complex64::new(0.0, 0.0)
        } else if p == 2.0 {
            self
        } else {
            self * (r.powf(p - 1.0) / r)
        }
    }

    #[inline]
    fn pair(self, other: Complex64) -> f64 {
        self.re * other.re + self.im * other.im
    }

    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Exponent `p >= 1` together with its conjugate `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PExponent {
    p: f64,
    q: f64,
}

impl PExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() || p < 1.0 {
            return Err(Error::InvalidExponent(p));
        }
        let q = if p == 1.0 { f64::INFINITY } else { p / (p - 1.0) };
        Ok(Self { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Conjugate exponent, `inf` for `p = 1`.
    pub fn q(&self) -> f64 {
        self.q
    }
}

/// Finite sequence of samples with a uniform quadrature weight.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteFunction<S = f64> {
    values: Vec<S>,
    weight: f64,
}

impl<S: Sample> DiscreteFunction<S> {
    pub fn new(values: Vec<S>) -> Result<Self> {
        Self::with_weight(values, 1.0)
    }

    pub fn with_weight(values: Vec<S>, weight: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidInput(
                "discrete function must have at least one sample".into(),
            ));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(Error::InvalidInput(format!(
                "quadrature weight must be positive, got {weight}"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {i} is not finite")));
        }
        Ok(Self { values, weight })
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `w * sum |f_i|^p`, i.e. the p-th power of the weighted p-norm.
    pub fn norm_pow(&self, p: PExponent) -> f64 {
        let p = p.p();
        self.weight * self.values.iter().map(|v| v.modulus().powf(p)).sum::<f64>()
    }

    pub fn negated(&self) -> Self {
        Self {
            values: self.values.iter().map(|&v| -v).collect(),
            weight: self.weight,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                actual: other.len(),
            });
        }
        if self.weight != other.weight {
            return Err(Error::InvalidInput(format!(
                "quadrature weights differ ({} vs {})",
                self.weight, other.weight
            )));
        }
        Ok(())
    }
}

/// Image of `f` under the L^p duality map.
pub fn dualize<S: Sample>(f: &DiscreteFunction<S>, p: PExponent) -> DiscreteFunction<S> {
    DiscreteFunction {
        values: f.values.iter().map(|v| v.dual(p.p())).collect(),
        weight: f.weight,
    }
}

/// Sum of `f(h - f*) + g(h - g*)` with `h = (f+g)*`, without the 1/2 prefactor.
fn cross_integral<S: Sample>(f: &DiscreteFunction<S>, g: &DiscreteFunction<S>, p: f64) -> f64 {
    let s: f64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(&a, &b)| {
            let h = (a + b).dual(p);
            a.pair(h) - a.pair(a.dual(p)) + b.pair(h) - b.pair(b.dual(p))
        })
        .sum();
    f.weight * s
}

pub fn weak_inner_product<S: Sample>(f: &DiscreteFunction<S>, g: &DiscreteFunction<S>, p: PExponent) -> Result<f64> {
    f.check_compatible(g)?;
    Ok(0.5 * cross_integral(f, g, p.p()))
}

/// `<f+g,(f+g)*> - <f,f*> - <g,g*>`; zero exactly when `f` and `g` are orthogonal.
pub fn pythagorean_defect<S: Sample>(f: &DiscreteFunction<S>, g: &DiscreteFunction<S>, p: PExponent) -> Result<f64> {
    f.check_compatible(g)?;
    let p = p.p();
    let (mut sum, mut fs, mut gs) = (0.0, 0.0, 0.0);
    for (&a, &b) in f.values.iter().zip(&g.values) {
        let h = a + b;
        sum += h.pair(h.dual(p));
        fs += a.pair(a.dual(p));
        gs += b.pair(b.dual(p));
    }
    Ok(f.weight * (sum - fs - gs))
}

/// Inverse cotangent on the branch `(0, pi)`, so `arccot(0) = pi/2`.
pub fn arccot(x: f64) -> f64 {
    FRAC_PI_2 - x.atan()
}

/// Angle between `f` and `g`: `arccot` of the cross integral taken without the
/// 1/2 prefactor of the weak inner product.
pub fn angle<S: Sample>(f: &DiscreteFunction<S>, g: &DiscreteFunction<S>, p: PExponent) -> Result<f64> {
    f.check_compatible(g)?;
    Ok(arccot(cross_integral(f, g, p.p())))
}

fn ortho_scale<S: Sample>(f: &DiscreteFunction<S>, g: &DiscreteFunction<S>, p: PExponent) -> f64 {
    1f64.max(f.norm_pow(p)).max(g.norm_pow(p))
}

/// `|wip| <= tol * max(1, |f|_p^p, |g|_p^p)`.
pub fn is_orthogonal<S: Sample>(
    f: &DiscreteFunction<S>,
    g: &DiscreteFunction<S>,
    p: PExponent,
    tol: f64,
) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let wip = weak_inner_product(f, g, p)?;
    Ok(wip.abs() <= tol * ortho_scale(f, g, p))
}

/// All geometric quantities for a pair at once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryResult {
    pub weak_inner_product: f64,
    pub cot_angle: f64,
    pub angle: f64,
    pub defect: f64,
    /// `max(1, |f|_p^p, |g|_p^p)`, the scale used by the orthogonality test.
    pub scale: f64,
}

impl GeometryResult {
    pub fn compute<S: Sample>(f: &DiscreteFunction<S>, g: &DiscreteFunction<S>, p: PExponent) -> Result<Self> {
        let defect = pythagorean_defect(f, g, p)?;
        let weak_inner_product = weak_inner_product(f, g, p)?;
        Ok(Self {
            weak_inner_product,
            cot_angle: defect,
            angle: arccot(defect),
            defect,
            scale: ortho_scale(f, g, p),
        })
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.weak_inner_product.abs() <= tol * self.scale
    }
}
