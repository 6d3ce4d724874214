//! L1 Fourier-energy accounting for signal decompositions.
//!
//! A signal of `n = 2B` samples lives on the grid `t_j = j / (2B)` and its
//! spectrum on the integer frequencies `xi_k = k`. The L1 Fourier energy is
//! `E1(s) = sum_k |s^(xi_k)|`; a decomposition `s = sum_k phi_k` conserves it
//! when `E1(s) = sum_k E1(phi_k)`, which (by the triangle inequality) happens
//! exactly when no frequency is over-counted.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Transform;
use crate::geometry::{self, DiscreteFunction, PExponent};

/// Relative l2 tolerance for `components + trend == source`.
pub const RECONSTRUCTION_TOL: f64 = 1e-10;
/// Relative threshold (w.r.t. `max_k |s^(xi_k)|`) above which an over-count is reported.
pub const UNWANTED_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    samples: Vec<f64>,
    bandwidth: f64,
}

impl Signal {
    /// Signal with the default bandwidth `B = n / 2`.
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        let b = samples.len() as f64 / 2.0;
        Self::with_bandwidth(samples, b)
    }

    pub fn with_bandwidth(samples: Vec<f64>, bandwidth: f64) -> Result<Self> {
        let n = samples.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "signal length must be even and at least 2, got {n}"
            )));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) || (2.0 * bandwidth - n as f64).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "bandwidth B = {bandwidth} inconsistent with n = {n} (need n = 2B)"
            )));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("sample {j} is not finite")));
        }
        Ok(Self { samples, bandwidth })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Sampling instants `t_j = j / (2B)`.
    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|j| j as f64 / (2.0 * self.bandwidth)).collect()
    }

    pub fn l2_norm(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn negated(&self) -> Self {
        Self {
            samples: self.samples.iter().map(|v| -v).collect(),
            bandwidth: self.bandwidth,
        }
    }
}

/// Spectrum on the frequency grid `xi_k = k`, `k = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coefficients: Vec<Complex64>,
    bandwidth: f64,
}

impl Spectrum {
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.coefficients.iter().map(|z| z.norm()).collect()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coefficients.iter().map(|z| z.norm()).sum()
    }
}

/// Unnormalized forward DFT, `s^(xi_k) = sum_j s_j exp(-2 pi i t_j xi_k)`.
pub fn dft(s: &Signal) -> Spectrum {
    Spectrum {
        coefficients: Transform::new(s.len()).forward_real(&s.samples),
        bandwidth: s.bandwidth,
    }
}

/// Inverse of [`dft`]; the imaginary residue of the inverse transform is dropped.
pub fn idft(spec: &Spectrum) -> Result<Signal> {
    let samples = Transform::new(spec.len()).inverse_to_real(&spec.coefficients);
    Signal::with_bandwidth(samples, spec.bandwidth)
}

pub fn l1_fourier_energy(s: &Signal) -> f64 {
    dft(s).l1_norm()
}

/// Per-stage bookkeeping of [`fif_decompose`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageInfo {
    pub halfwidth: usize,
    pub inner_iterations: usize,
    pub achieved_delta: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionMeta {
    pub halfwidths: Vec<usize>,
    pub delta: f64,
    pub max_inner: usize,
    pub stages: Vec<StageInfo>,
}

/// Ordered components plus a trend, summing to `source`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    components: Vec<Signal>,
    trend: Signal,
    source: Signal,
    meta: Option<DecompositionMeta>,
}

fn check_same_grid(reference: &Signal, other: &Signal) -> Result<()> {
    if other.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            actual: other.len(),
        });
    }
    if other.bandwidth != reference.bandwidth {
        return Err(Error::InvalidInput("components use different bandwidths".into()));
    }
    Ok(())
}

fn reconstruction_error(source: &Signal, components: &[Signal], trend: &Signal) -> f64 {
    let mut acc = trend.samples.clone();
    for c in components {
        acc.iter_mut().zip(&c.samples).for_each(|(a, v)| *a += v);
    }
    let diff = acc
        .iter()
        .zip(&source.samples)
        .map(|(a, s)| (a - s).powi(2))
        .sum::<f64>()
        .sqrt();
    let norm = source.l2_norm();
    if norm == 0.0 {
        if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / norm
    }
}

impl Decomposition {
    /// Decomposition of the signal `sum(components) + trend`.
    pub fn new(components: Vec<Signal>, trend: Signal) -> Result<Self> {
        for c in &components {
            check_same_grid(&trend, c)?;
        }
        let mut acc = trend.samples.clone();
        for c in &components {
            acc.iter_mut().zip(&c.samples).for_each(|(a, v)| *a += v);
        }
        let source = Signal::with_bandwidth(acc, trend.bandwidth)?;
        Ok(Self {
            components,
            trend,
            source,
            meta: None,
        })
    }

    /// Decomposition of a known signal; fails if the parts do not add up to it.
    pub fn with_source(source: Signal, components: Vec<Signal>, trend: Signal) -> Result<Self> {
        check_same_grid(&source, &trend)?;
        for c in &components {
            check_same_grid(&source, c)?;
        }
        let err = reconstruction_error(&source, &components, &trend);
        if !(err <= RECONSTRUCTION_TOL) {
            return Err(Error::InconsistentDecomposition(err));
        }
        Ok(Self {
            components,
            trend,
            source,
            meta: None,
        })
    }

    pub fn with_meta(mut self, meta: DecompositionMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn components(&self) -> &[Signal] {
        &self.components
    }

    pub fn trend(&self) -> &Signal {
        &self.trend
    }

    pub fn source(&self) -> &Signal {
        &self.source
    }

    pub fn meta(&self) -> Option<&DecompositionMeta> {
        self.meta.as_ref()
    }

    /// Components followed by the trend.
    pub fn parts(&self) -> impl Iterator<Item = &Signal> {
        self.components.iter().chain(std::iter::once(&self.trend))
    }

    pub fn reconstruction_error(&self) -> f64 {
        reconstruction_error(&self.source, &self.components, &self.trend)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnwantedOscillation {
    pub index: usize,
    pub excess: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total_energy: f64,
    /// Energies of the components, trend last.
    pub component_energies: Vec<f64>,
    pub conservation_gap: f64,
    pub tolerance: f64,
    pub conserved: bool,
    pub unwanted_frequencies: Vec<UnwantedOscillation>,
}

/// Per-frequency magnitudes of the source and of the summed parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralProfile {
    pub signal: Vec<f64>,
    /// `|phi^_k(xi)|` for every part (components then trend).
    pub parts: Vec<Vec<f64>>,
    pub summed: Vec<f64>,
}

impl SpectralProfile {
    pub fn of(d: &Decomposition) -> Self {
        let signal = dft(&d.source).magnitudes();
        let parts: Vec<Vec<f64>> = d.parts().map(|c| dft(c).magnitudes()).collect();
        let mut summed = vec![0.0; signal.len()];
        for p in &parts {
            summed.iter_mut().zip(p).for_each(|(a, v)| *a += v);
        }
        Self { signal, parts, summed }
    }

    fn unwanted(&self) -> Vec<UnwantedOscillation> {
        let peak = self.signal.iter().cloned().fold(0.0, f64::max);
        let thresh = UNWANTED_REL_TOL * peak;
        self.summed
            .iter()
            .zip(&self.signal)
            .enumerate()
            .filter_map(|(index, (sum, s))| {
                let excess = sum - s;
                (excess > thresh).then_some(UnwantedOscillation { index, excess })
            })
            .collect()
    }
}

pub fn check_energy_conservation(d: &Decomposition, tol: f64) -> Result<EnergyReport> {
    let err = d.reconstruction_error();
    if !(err <= RECONSTRUCTION_TOL) {
        return Err(Error::InconsistentDecomposition(err));
    }
    let profile = SpectralProfile::of(d);
    let total_energy: f64 = profile.signal.iter().sum();
    let component_energies: Vec<f64> = profile.parts.iter().map(|p| p.iter().sum()).collect();
    let conservation_gap = component_energies.iter().sum::<f64>() - total_energy;
    Ok(EnergyReport {
        total_energy,
        conservation_gap,
        tolerance: tol,
        conserved: conservation_gap.abs() <= tol * total_energy,
        unwanted_frequencies: profile.unwanted(),
        component_energies,
    })
}

/// Frequencies `xi` with `sum_k |phi^_k(xi)| > |s^(xi)|` (trend included among the parts).
pub fn detect_unwanted_oscillations(d: &Decomposition) -> Vec<UnwantedOscillation> {
    SpectralProfile::of(d).unwanted()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FifOptions {
    pub halfwidths: Vec<usize>,
    pub delta: f64,
    pub max_inner: usize,
}

impl FifOptions {
    pub fn new(halfwidths: Vec<usize>) -> Self {
        Self {
            halfwidths,
            delta: 1e-3,
            max_inner: 200,
        }
    }
}

/// Transfer function of the symmetric moving average of length `2h + 1`
/// on the `n`-periodic grid, evaluated at `xi_k = k`.
fn moving_average_transfer(n: usize, h: usize) -> Vec<f64> {
    let len = (2 * h + 1) as f64;
    (0..n)
        .map(|k| {
            let mut acc = 1.0;
            for m in 1..=h {
                acc += 2.0 * (2.0 * PI * ((m * k) % n) as f64 / n as f64).cos();
            }
            acc / len
        })
        .collect()
}

/// Spectral iterative filtering with double-convolution (self-convolved
/// moving-average) filters.
///
/// Stage `i` uses the filter `w * w`, whose transfer `w^(xi)^2` lies in
/// `[0, 1]`. The inner sifting `x <- x - (w * w) x` is run in the Fourier
/// domain until the relative l2 change drops to `delta` or `max_inner`
/// iterations are spent; the extracted component is `(1 - w^2)^N r^`, the
/// rest carries over to the next stage and the last remainder is the trend.
/// Every frequency is split into nonnegative shares of the same phase, so
/// the decomposition conserves the L1 Fourier energy.
pub fn fif_decompose(s: &Signal, opts: &FifOptions) -> Result<Decomposition> {
    let n = s.len();
    if opts.halfwidths.is_empty() {
        return Err(Error::InvalidSchedule(
            "at least one filter halfwidth is required".into(),
        ));
    }
    if opts.halfwidths[0] == 0 {
        return Err(Error::InvalidSchedule("halfwidths must be positive".into()));
    }
    if opts.halfwidths.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidSchedule("halfwidths must be strictly increasing".into()));
    }
    if let Some(&h) = opts.halfwidths.iter().find(|&&h| 2 * h >= n) {
        return Err(Error::InvalidSchedule(format!(
            "halfwidth {h} must be below n/2 = {}",
            n / 2
        )));
    }
    if !(opts.delta.is_finite() && opts.delta > 0.0) {
        return Err(Error::InvalidSchedule(format!(
            "delta must be positive, got {}",
            opts.delta
        )));
    }
    if opts.max_inner == 0 {
        return Err(Error::InvalidSchedule("max_inner must be at least 1".into()));
    }

    let transform = Transform::new(n);
    let mut remainder = transform.forward_real(&s.samples);
    let mut components = Vec::with_capacity(opts.halfwidths.len());
    let mut stages = Vec::with_capacity(opts.halfwidths.len());

    for &h in &opts.halfwidths {
        let w2: Vec<f64> = moving_average_transfer(n, h).into_iter().map(|w| w * w).collect();
        let keep: Vec<f64> = w2.iter().map(|w| 1.0 - w).collect();

        // |x_{N-1}^| per frequency; the iterate only ever rescales each bin.
        let mut cur: Vec<f64> = remainder.iter().map(|z| z.norm()).collect();
        let mut iterations = 0;
        let mut achieved = 0.0;
        let mut converged = false;
        while iterations < opts.max_inner {
            iterations += 1;
            let (mut num, mut den) = (0.0, 0.0);
            for ((c, w), k) in cur.iter_mut().zip(&w2).zip(&keep) {
                num += (w * *c).powi(2);
                den += *c * *c;
                *c *= k;
            }
            achieved = if den == 0.0 { 0.0 } else { (num / den).sqrt() };
            if achieved <= opts.delta {
                converged = true;
                break;
            }
        }
        if !converged {
            log::warn!("stage h={h}: relative change {achieved:e} above delta after {iterations} sweeps");
        }

        let mut comp = Vec::with_capacity(n);
        for (r, k) in remainder.iter_mut().zip(&keep) {
            let share = k.powi(iterations as i32);
            comp.push(*r * share);
            *r *= 1.0 - share;
        }
        components.push(Signal::with_bandwidth(transform.inverse_to_real(&comp), s.bandwidth)?);
        stages.push(StageInfo {
            halfwidth: h,
            inner_iterations: iterations,
            achieved_delta: achieved,
            converged,
        });
    }
    let trend = Signal::with_bandwidth(transform.inverse_to_real(&remainder), s.bandwidth)?;
    let meta = DecompositionMeta {
        halfwidths: opts.halfwidths.clone(),
        delta: opts.delta,
        max_inner: opts.max_inner,
        stages,
    };
    Ok(Decomposition::with_source(s.clone(), components, trend)?.with_meta(meta))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Frequency,
}

impl std::str::FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(Domain::Time),
            "frequency" | "freq" => Ok(Domain::Frequency),
            other => Err(Error::Parse(format!("unknown domain '{other}'"))),
        }
    }
}

/// Symmetric matrix of pairwise L1 Pythagorean defects between components
/// (trend excluded), diagonal zero.
pub fn pairwise_l1_defects(d: &Decomposition, domain: Domain) -> Result<Vec<Vec<f64>>> {
    let m = d.components.len();
    let p1 = PExponent::new(1.0)?;
    let mut out = vec![vec![0.0; m]; m];
    match domain {
        Domain::Time => {
            let fs = d
                .components
                .iter()
                .map(|c| DiscreteFunction::new(c.samples.clone()))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..m {
                for j in i + 1..m {
                    let v = geometry::pythagorean_defect(&fs[i], &fs[j], p1)?;
                    out[i][j] = v;
                    out[j][i] = v;
                }
            }
        }
        Domain::Frequency => {
            let fs = d
                .components
                .iter()
                .map(|c| DiscreteFunction::new(dft(c).coefficients))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..m {
                for j in i + 1..m {
                    let v = geometry::pythagorean_defect(&fs[i], &fs[j], p1)?;
                    out[i][j] = v;
                    out[j][i] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Pairwise L1 angles between components; diagonal entries are 0.
pub fn pairwise_l1_angles(d: &Decomposition, domain: Domain) -> Result<Vec<Vec<f64>>> {
    let mut m = pairwise_l1_defects(d, domain)?;
    for (i, row) in m.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = if i == j { 0.0 } else { geometry::arccot(*v) };
        }
    }
    Ok(m)
}

/// `cos(2 pi (90 t^2 + 10 t)) + cos(2 pi t)` sampled on `t_j = j / n`: a
/// chirp sweeping 10..190 Hz on top of a 1 Hz tone.
pub fn chirp_plus_tone(n: usize) -> Result<Signal> {
    let samples = (0..n)
        .map(|j| {
            let t = j as f64 / n as f64;
            (2.0 * PI * (90.0 * t * t + 10.0 * t)).cos() + (2.0 * PI * t).cos()
        })
        .collect();
    Signal::new(samples)
}
