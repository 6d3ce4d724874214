use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::{next_fast_len, Transform};

/// `f(theta) = alpha + beta (2 - 2 cos theta) + gamma (2 - 2 cos theta)^2`.
///
/// Its Fourier coefficients are `phi = alpha + 2 beta + 6 gamma` at offset 0,
/// `psi = -beta - 4 gamma` at offsets +-1 and `gamma` at +-2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSymbol {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl ModelSymbol {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta), ("gamma", gamma)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and nonnegative, got {v}"
                )));
            }
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn phi(&self) -> f64 {
        self.alpha + 2.0 * self.beta + 6.0 * self.gamma
    }

    pub fn psi(&self) -> f64 {
        -self.beta - 4.0 * self.gamma
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let s = 2.0 - 2.0 * theta.cos();
        self.alpha + self.beta * s + self.gamma * s * s
    }

    pub fn coefficient(&self, k: i64) -> f64 {
        match k.abs() {
            0 => self.phi(),
            1 => self.psi(),
            2 => self.gamma,
            _ => 0.0,
        }
    }

    /// `(min f, max f) = (alpha, alpha + 4 beta + 16 gamma)`.
    pub fn range(&self) -> (f64, f64) {
        (self.alpha, self.alpha + 4.0 * self.beta + 16.0 * self.gamma)
    }
}

/// Generating function given either by the model family or by a finite set of
/// real Fourier coefficients (missing offsets are zero).
#[derive(Debug, Clone, PartialEq)]
pub enum ToeplitzSymbol {
    Model(ModelSymbol),
    Coefficients(BTreeMap<i64, f64>),
}

impl ToeplitzSymbol {
    pub fn coefficient(&self, k: i64) -> f64 {
        match self {
            ToeplitzSymbol::Model(m) => m.coefficient(k),
            ToeplitzSymbol::Coefficients(map) => map.get(&k).copied().unwrap_or(0.0),
        }
    }
}

impl From<ModelSymbol> for ToeplitzSymbol {
    fn from(m: ModelSymbol) -> Self {
        ToeplitzSymbol::Model(m)
    }
}

/// `T_n = [t_{i-j}]`, stored by diagonal with a precomputed circulant
/// embedding for fast products.
#[derive(Debug, Clone)]
pub struct ToeplitzOperator {
    n: usize,
    /// `t_k` for `k = -(n-1)..=(n-1)`, at index `k + n - 1`.
    diagonals: Vec<f64>,
    model: Option<ModelSymbol>,
    embed: Transform,
    embed_spectrum: Vec<Complex64>,
}

pub fn build_toeplitz(symbol: &ToeplitzSymbol, n: usize) -> Result<ToeplitzOperator> {
    if n < 1 {
        return Err(Error::InvalidInput("Toeplitz dimension must be at least 1".into()));
    }
    let reach = n as i64 - 1;
    let diagonals = (-reach..=reach).map(|k| symbol.coefficient(k)).collect();
    let model = match symbol {
        ToeplitzSymbol::Model(m) => Some(*m),
        ToeplitzSymbol::Coefficients(_) => None,
    };
    ToeplitzOperator::from_parts(n, diagonals, model)
}

impl ToeplitzOperator {
    /// Operator from `t_{-(n-1)}, ..., t_{n-1}`.
    pub fn from_diagonals(diagonals: Vec<f64>) -> Result<Self> {
        if diagonals.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("need 2n - 1 diagonals".into()));
        }
        let n = diagonals.len().div_ceil(2);
        Self::from_parts(n, diagonals, None)
    }

    fn from_parts(n: usize, diagonals: Vec<f64>, model: Option<ModelSymbol>) -> Result<Self> {
        if let Some(i) = diagonals.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "diagonal {} is not finite",
                i as i64 - (n as i64 - 1)
            )));
        }
        let m = next_fast_len(2 * n - 1);
        let embed = Transform::new(m);
        // first column of the embedding circulant: t_0..t_{n-1}, zeros, t_{-(n-1)}..t_{-1}
        let mut col = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..n {
            col[k] = Complex64::new(diagonals[k + n - 1], 0.0);
        }
        for k in 1..n {
            col[m - k] = Complex64::new(diagonals[n - 1 - k], 0.0);
        }
        embed.forward_in_place(&mut col);
        Ok(Self {
            n,
            diagonals,
            model,
            embed,
            embed_spectrum: col,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `t_k`; zero outside `|k| < n`.
    pub fn coefficient(&self, k: i64) -> f64 {
        let idx = k + self.n as i64 - 1;
        if idx < 0 || idx as usize >= self.diagonals.len() {
            0.0
        } else {
            self.diagonals[idx as usize]
        }
    }

    pub fn model(&self) -> Option<&ModelSymbol> {
        self.model.as_ref()
    }

    pub fn is_symmetric(&self) -> bool {
        (1..self.n as i64).all(|k| self.coefficient(k) == self.coefficient(-k))
    }

    /// Length of the circulant embedding used by [`matvec`](Self::matvec).
    pub fn embedding_len(&self) -> usize {
        self.embed.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                actual: x.len(),
            });
        }
        Ok(self.apply(x))
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.embed.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (b, &v) in buf.iter_mut().zip(x) {
            b.re = v;
        }
        self.embed.forward_in_place(&mut buf);
        buf.iter_mut().zip(&self.embed_spectrum).for_each(|(b, s)| *b *= s);
        self.embed.inverse_in_place(&mut buf);
        buf[..self.n].iter().map(|z| z.re).collect()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.coefficient(i as i64 - j as i64))
    }
}

/// Entrywise `(sum |x_jk|^p)^(1/p)`.
pub fn lp_matrix_norm(x: &DMatrix<f64>, p: f64) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p == 1.0 {
        return Ok(x.iter().map(|v| v.abs()).sum());
    }
    if p == 2.0 {
        return Ok(x.iter().map(|v| v * v).sum::<f64>().sqrt());
    }
    // scale by the largest entry to keep |x|^p in range
    let peak = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = x.iter().map(|v| (v.abs() / peak).powf(p)).sum();
    Ok(peak * s.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn model_coefficients() {
        let m = ModelSymbol::new(1.0, 2.0, 3.0).unwrap();
        assert_eq!(m.phi(), 23.0);
        assert_eq!(m.psi(), -14.0);
        let t = build_toeplitz(&m.into(), 6).unwrap();
        assert_eq!(t.coefficient(0), 23.0);
        assert_eq!(t.coefficient(1), -14.0);
        assert_eq!(t.coefficient(-1), -14.0);
        assert_eq!(t.coefficient(2), 3.0);
        assert_eq!(t.coefficient(-2), 3.0);
        assert_eq!(t.coefficient(3), 0.0);
        assert_eq!(t.coefficient(99), 0.0);
        assert!(t.is_symmetric());
        assert!(ModelSymbol::new(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn laplacian_model() {
        let t = build_toeplitz(&ModelSymbol::new(0.0, 1.0, 0.0).unwrap().into(), 4).unwrap();
        let d = t.to_dense();
        let expect = DMatrix::from_row_slice(
            4,
            4,
            &[
                2.0, -1.0, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0, 2.0,
            ],
        );
        assert_eq!(d, expect);
        let y = t.matvec(&[1.0; 4]).unwrap();
        for (a, b) in y.iter().zip([1.0, 0.0, 0.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn symbol_matches_its_coefficients() {
        let m = ModelSymbol::new(0.5, 1.5, 2.0).unwrap();
        for &th in &[0.0, 0.3, 1.0, 2.5, std::f64::consts::PI] {
            let series: f64 = (-2..=2).map(|k| m.coefficient(k) * (k as f64 * th).cos()).sum();
            assert_relative_eq!(m.eval(th), series, epsilon = 1e-12);
        }
        assert_eq!(m.range(), (0.5, 0.5 + 6.0 + 32.0));
    }

    #[test]
    fn identity_matvec() {
        let mut c = BTreeMap::new();
        c.insert(0, 1.0);
        let t = build_toeplitz(&ToeplitzSymbol::Coefficients(c), 7).unwrap();
        let x = [1.0, -2.0, 3.5, 0.0, 4.0, 1e-3, 9.0];
        let y = t.matvec(&x).unwrap();
        for (a, b) in y.iter().zip(&x) {
            assert!((a - b).abs() < 1e-13);
        }
        assert!(t.matvec(&[1.0]).is_err());
    }

    #[test]
    fn nonsymmetric_diagonals() {
        let t = ToeplitzOperator::from_diagonals(vec![5.0, 4.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.n(), 3);
        let d = t.to_dense();
        // row 0 is t_0, t_-1, t_-2
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(0, 1)], 4.0);
        assert_eq!(d[(0, 2)], 5.0);
        assert_eq!(d[(2, 0)], 3.0);
        assert!(!t.is_symmetric());
        assert!(ToeplitzOperator::from_diagonals(vec![1.0, 2.0]).is_err());
        assert!(build_toeplitz(&ModelSymbol::new(1.0, 1.0, 1.0).unwrap().into(), 0).is_err());
    }

    #[test]
    fn embedding_length_is_fast_and_long_enough() {
        let t = build_toeplitz(&ModelSymbol::new(1.0, 2.0, 3.0).unwrap().into(), 700).unwrap();
        assert!(t.embedding_len() >= 1399);
        assert_eq!(t.embedding_len(), 1440);
    }

    #[test]
    fn lp_norm_examples() {
        assert_eq!(lp_matrix_norm(&DMatrix::identity(2, 2), 1.0).unwrap(), 2.0);
        let x = DMatrix::from_row_slice(2, 2, &[3.0, 4.0, 0.0, 0.0]);
        assert_eq!(lp_matrix_norm(&x, 2.0).unwrap(), 5.0);
        assert_relative_eq!(lp_matrix_norm(&x, 3.0).unwrap(), 91f64.powf(1.0 / 3.0), epsilon = 1e-14);
        assert!(lp_matrix_norm(&x, 0.5).is_err());
        assert_eq!(lp_matrix_norm(&DMatrix::zeros(2, 2), 3.0).unwrap(), 0.0);
    }
}
