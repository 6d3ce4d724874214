//! Dense desk-scale diagnostics: preconditioned spectra and the choice of p.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::circulant::{lp_circulant_minimizer, CirculantMatrix};
use super::operator::ToeplitzOperator;
use crate::error::{Error, Result};

/// Largest dimension accepted by the dense routines in this module.
pub const DENSE_LIMIT: usize = 256;
pub const DEFAULT_EPSILON: f64 = 1e-6;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues of a real symmetric matrix by the cyclic Jacobi method,
/// sorted ascending.
pub fn symmetric_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..n {
        for j in i + 1..n {
            if (a[(i, j)] - a[(j, i)]).abs() > 1e-12 * scale.max(1.0) {
                return Err(Error::InvalidInput("matrix is not symmetric".into()));
            }
        }
    }
    // row-major working copy
    let mut m: Vec<f64> = (0..n * n).map(|k| a[(k / n, k % n)]).collect();
    let frob = m.iter().map(|v| v * v).sum::<f64>().sqrt();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (kp, kq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * kp - s * kq;
                    m[k * n + q] = s * kp + c * kq;
                }
                for k in 0..n {
                    let (pk, qk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * pk - s * qk;
                    m[q * n + k] = s * pk + c * qk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// Eigenvalues of `C^-1/2 T C^-1/2`, ascending.
    pub eigenvalues: Vec<f64>,
    pub within_10pct: f64,
    pub within_1pct: f64,
}

impl ClusterReport {
    /// Fraction of eigenvalues in `[1 - rho, 1 + rho]`.
    pub fn fraction_within(&self, rho: f64) -> f64 {
        let hits = self.eigenvalues.iter().filter(|l| (*l - 1.0).abs() <= rho).count();
        hits as f64 / self.eigenvalues.len() as f64
    }
}

fn check_dense(t: &ToeplitzOperator, c: &CirculantMatrix) -> Result<()> {
    if t.n() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n: t.n(),
            limit: DENSE_LIMIT,
        });
    }
    if c.n() != t.n() {
        return Err(Error::DimensionMismatch {
            expected: t.n(),
            actual: c.n(),
        });
    }
    Ok(())
}

fn sqrt_inverse_similarity(t: &ToeplitzOperator, c: &CirculantMatrix) -> Result<DMatrix<f64>> {
    let s = c.spectral_map(|l| 1.0 / l.sqrt())?.to_dense();
    let a = &s * t.to_dense() * &s;
    Ok((&a + a.transpose()) * 0.5)
}

/// Spectrum of the preconditioned matrix and its clustering around 1.
pub fn preconditioned_spectrum_diagnostic(t: &ToeplitzOperator, c: &CirculantMatrix) -> Result<ClusterReport> {
    check_dense(t, c)?;
    if !c.is_positive_definite() {
        let min = c.eigenvalues().iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        return Err(Error::NotPositiveDefinite(min));
    }
    let eigenvalues = symmetric_eigenvalues(&sqrt_inverse_similarity(t, c)?)?;
    let mut r = ClusterReport {
        eigenvalues,
        within_10pct: 0.0,
        within_1pct: 0.0,
    };
    r.within_10pct = r.fraction_within(0.1);
    r.within_1pct = r.fraction_within(0.01);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PTildeMode {
    /// Smallest p whose minimizer is positive definite (checked on its spectrum).
    #[default]
    Spectral,
    /// Dense eigenvalues of `C^-1 T` must be real to within `epsilon` and positive.
    Exact,
}

/// Smallest grid exponent giving a usable l^p circulant preconditioner.
pub fn select_p_tilde(t: &ToeplitzOperator, grid: &[f64], epsilon: f64, mode: PTildeMode) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("exponent grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("exponent grid must be strictly ascending".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidInput(format!("epsilon must be positive, got {epsilon}")));
    }
    if mode == PTildeMode::Exact && t.n() > DENSE_LIMIT {
        return Err(Error::TooLarge {
            n: t.n(),
            limit: DENSE_LIMIT,
        });
    }
    for &p in grid {
        let c = lp_circulant_minimizer(t, p)?;
        let ok = match mode {
            PTildeMode::Spectral => c.is_positive_definite(),
            PTildeMode::Exact => exact_spectrum_is_real_positive(t, &c, epsilon)?,
        };
        log::debug!("p = {p}: {}", if ok { "accepted" } else { "rejected" });
        if ok {
            return Ok(p);
        }
    }
    Err(Error::NoExponentFound)
}

fn exact_spectrum_is_real_positive(t: &ToeplitzOperator, c: &CirculantMatrix, epsilon: f64) -> Result<bool> {
    if c.is_singular() {
        return Ok(false);
    }
    if c.is_positive_definite() {
        let eig = symmetric_eigenvalues(&sqrt_inverse_similarity(t, c)?)?;
        return Ok(eig.iter().all(|&l| l > 0.0));
    }
    let Some(cinv_t) = c.to_dense().lu().solve(&t.to_dense()) else {
        return Ok(false);
    };
    Ok(cinv_t
        .complex_eigenvalues()
        .iter()
        .all(|z| z.im.abs() < epsilon && z.re > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toeplitz::operator::{build_toeplitz, ModelSymbol};
    use approx::assert_relative_eq;

    fn model(a: f64, b: f64, g: f64, n: usize) -> ToeplitzOperator {
        build_toeplitz(&ModelSymbol::new(a, b, g).unwrap().into(), n).unwrap()
    }

    #[test]
    fn jacobi_matches_nalgebra() {
        let n = 20;
        let a = DMatrix::from_fn(n, n, |i, j| {
            ((i * 3 + j * 3 + i * j) % 7) as f64 - 3.0 + if i == j { 2.0 } else { 0.0 }
        });
        let a = (&a + a.transpose()) * 0.5;
        let ours = symmetric_eigenvalues(&a).unwrap();
        let mut theirs: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(f64::total_cmp);
        for (x, y) in ours.iter().zip(&theirs) {
            assert_relative_eq!(*x, *y, epsilon = 1e-11);
        }
        assert!(symmetric_eigenvalues(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
    }

    #[test]
    fn model_eigenvalues_inside_symbol_range() {
        let t = model(1.0, 2.0, 3.0, 64);
        let eig = symmetric_eigenvalues(&t.to_dense()).unwrap();
        assert!(eig[0] > 1.0);
        assert!(*eig.last().unwrap() < 65.0);
    }

    #[test]
    fn preconditioning_by_itself_gives_ones() {
        let c = CirculantMatrix::new(vec![6.0, -2.0, 0.5, 0.0, 0.5, -2.0]).unwrap();
        let n = c.n() as i64;
        let diags = (-(n - 1)..n)
            .map(|k| c.first_column()[k.rem_euclid(n) as usize])
            .collect();
        let t = ToeplitzOperator::from_diagonals(diags).unwrap();
        let r = preconditioned_spectrum_diagnostic(&t, &c).unwrap();
        assert!(r.eigenvalues.iter().all(|l| (l - 1.0).abs() < 1e-12));
        assert_eq!(r.within_1pct, 1.0);
    }

    #[test]
    fn diagnostic_rejects_bad_inputs() {
        let t = model(0.0, 2.0, 8.0, 32);
        let c = lp_circulant_minimizer(&t, 1.0).unwrap();
        assert!(matches!(
            preconditioned_spectrum_diagnostic(&t, &c),
            Err(Error::NotPositiveDefinite(_))
        ));
        let big = model(1.0, 2.0, 3.0, 300);
        let c = lp_circulant_minimizer(&big, 1.0).unwrap();
        assert!(matches!(
            preconditioned_spectrum_diagnostic(&big, &c),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn p_tilde_examples() {
        let grid = [1.0, 1.4, 1.6, 1.8, 3.0];
        assert_eq!(
            select_p_tilde(&model(1.0, 2.0, 3.0, 100), &grid, 1e-6, PTildeMode::Spectral).unwrap(),
            1.0
        );
        assert_eq!(
            select_p_tilde(&model(0.0, 2.0, 8.0, 100), &grid, 1e-6, PTildeMode::Spectral).unwrap(),
            1.6
        );
        assert_eq!(
            select_p_tilde(&model(100.0, 1.0, 1.0, 100), &grid[1..], 1e-6, PTildeMode::Spectral).unwrap(),
            1.4
        );
        assert_eq!(
            select_p_tilde(&model(0.0, 2.0, 8.0, 64), &grid, 1e-6, PTildeMode::Exact).unwrap(),
            1.6
        );
    }

    #[test]
    fn p_tilde_errors() {
        let t = model(0.0, 2.0, 8.0, 100);
        assert!(select_p_tilde(&t, &[], 1e-6, PTildeMode::Spectral).is_err());
        assert!(select_p_tilde(&t, &[2.0, 1.0], 1e-6, PTildeMode::Spectral).is_err());
        assert_eq!(
            select_p_tilde(&t, &[1.0, 1.4], 1e-6, PTildeMode::Spectral).unwrap_err(),
            Error::NoExponentFound
        );
        assert!(select_p_tilde(&model(1.0, 1.0, 1.0, 300), &[1.0], 1e-6, PTildeMode::Exact).is_err());
    }
}
