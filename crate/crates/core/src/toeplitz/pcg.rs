use serde::{Deserialize, Serialize};

use super::circulant::{apply_inverse, CirculantMatrix};
use super::operator::ToeplitzOperator;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcgOptions {
    /// Stop once `|b - T x|_2 / |b|_2 <= tol`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 n`.
    pub maxit: Option<usize>,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            maxit: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
    /// Some circulant eigenvalue is zero to machine precision.
    PreconditionerSingular,
    /// `r . M^-1 r <= 0` was hit: the preconditioner is not positive definite.
    PreconditionerIndefinite,
}

impl SolveStatus {
    pub fn is_failure(self) -> bool {
        !matches!(self, SolveStatus::Converged)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub iterations: usize,
    /// `|r_k| / |b|` for `k = 0..=iterations`.
    pub relative_residuals: Vec<f64>,
    pub status: SolveStatus,
    pub p_used: Option<f64>,
    #[serde(skip)]
    pub solution: Vec<f64>,
}

impl SolveReport {
    pub fn final_residual(&self) -> Option<f64> {
        self.relative_residuals.last().copied()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients on `T x = b` from `x0 = 0`, optionally preconditioned
/// by a circulant.
pub fn pcg_solve(
    t: &ToeplitzOperator,
    b: &[f64],
    m: Option<&CirculantMatrix>,
    opts: &PcgOptions,
) -> Result<SolveReport> {
    let n = t.n();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: b.len(),
        });
    }
    if let Some(m) = m {
        if m.n() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: m.n(),
            });
        }
    }
    if !t.is_symmetric() {
        return Err(Error::InvalidInput(
            "conjugate gradients need a symmetric Toeplitz matrix".into(),
        ));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("right-hand side must be finite".into()));
    }
    let maxit = opts.maxit.unwrap_or(10 * n);
    let p_used = m.and_then(|m| m.p());

    let report = |iterations, relative_residuals, status, solution| SolveReport {
        iterations,
        relative_residuals,
        status,
        p_used,
        solution,
    };

    if let Some(m) = m {
        if m.is_singular() {
            return Ok(report(0, Vec::new(), SolveStatus::PreconditionerSingular, vec![0.0; n]));
        }
    }
    let precondition = |r: &[f64]| match m {
        Some(m) => apply_inverse(m, r),
        None => r.to_vec(),
    };

    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(report(0, vec![0.0], SolveStatus::Converged, x));
    }
    let mut r = b.to_vec();
    let mut history = vec![1.0];
    let mut z = precondition(&r);
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Ok(report(0, history, SolveStatus::PreconditionerIndefinite, x));
    }
    let mut dir = z.clone();

    for it in 1..=maxit {
        let td = t.apply(&dir);
        let step = rz / dot(&dir, &td);
        x.iter_mut().zip(&dir).for_each(|(xi, di)| *xi += step * di);
        r.iter_mut().zip(&td).for_each(|(ri, ti)| *ri -= step * ti);
        let rel = norm(&r) / bnorm;
        history.push(rel);
        if rel <= opts.tol {
            return Ok(report(it, history, SolveStatus::Converged, x));
        }
        z = precondition(&r);
        let rz_next = dot(&r, &z);
        if !(rz_next > 0.0) {
            return Ok(report(it, history, SolveStatus::PreconditionerIndefinite, x));
        }
        let beta = rz_next / rz;
        rz = rz_next;
        dir.iter_mut().zip(&z).for_each(|(d, zi)| *d = zi + beta * *d);
    }
    log::debug!("pcg: no convergence in {maxit} iterations");
    Ok(report(maxit, history, SolveStatus::MaxIterations, x))
}
