//! Text formats: sample CSVs, decomposition JSON and energy reports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Decomposition, DecompositionMeta, EnergyReport, Signal, SpectralProfile};

/// Float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Values from a CSV holding one number per line (or comma separated);
/// blank lines and `#` comments are skipped.
pub fn parse_vector_csv(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        for field in line.split(',').map(str::trim).filter(|f| !f.is_empty()) {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("line {}: '{field}' is not a number", lineno + 1)))?;
            out.push(v);
        }
    }
    Ok(out)
}

/// Signal CSV: one sample per line, optional `# B=<value>` header.
pub fn parse_signal_csv(text: &str) -> Result<Signal> {
    let mut bandwidth = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(v) = rest
                .trim()
                .strip_prefix("B=")
                .or_else(|| rest.trim().strip_prefix("B ="))
            {
                bandwidth = Some(
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad bandwidth header '{line}'")))?,
                );
            }
        }
    }
    let samples = parse_vector_csv(text)?;
    match bandwidth {
        Some(b) => Signal::with_bandwidth(samples, b),
        None => Signal::new(samples),
    }
}

pub fn signal_to_csv(s: &Signal) -> String {
    let mut out = format!("# B={}\n", s.bandwidth());
    for v in s.samples() {
        out.push_str(&fmt_f64(*v));
        out.push('\n');
    }
    out
}

/// On-disk decomposition: `components`, `trend`, optional `signal` (checked
/// against the parts when present), `bandwidth` and `meta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub components: Vec<Vec<f64>>,
    pub trend: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signal: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<DecompositionMeta>,
}

impl DecompositionFile {
    pub fn from_decomposition(d: &Decomposition) -> Self {
        Self {
            components: d.components().iter().map(|c| c.samples().to_vec()).collect(),
            trend: d.trend().samples().to_vec(),
            signal: Some(d.source().samples().to_vec()),
            bandwidth: Some(d.source().bandwidth()),
            meta: d.meta().cloned(),
        }
    }

    pub fn into_decomposition(self) -> Result<Decomposition> {
        let b = self.bandwidth.unwrap_or(self.trend.len() as f64 / 2.0);
        let trend = Signal::with_bandwidth(self.trend, b)?;
        let components = self
            .components
            .into_iter()
            .map(|c| Signal::with_bandwidth(c, b))
            .collect::<Result<Vec<_>>>()?;
        let d = match self.signal {
            Some(s) => Decomposition::with_source(Signal::with_bandwidth(s, b)?, components, trend)?,
            None => Decomposition::new(components, trend)?,
        };
        Ok(match self.meta {
            Some(m) => d.with_meta(m),
            None => d,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("decomposition serializes")
    }
}

/// Human-readable energy table.
pub fn energy_table(r: &EnergyReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{:<12} {:>24}", "part", "E1");
    let m = r.component_energies.len();
    for (i, e) in r.component_energies.iter().enumerate() {
        let name = if i + 1 == m {
            "trend".to_string()
        } else {
            format!("imf {}", i + 1)
        };
        let _ = writeln!(out, "{name:<12} {:>24}", fmt_f64(*e));
    }
    let _ = writeln!(out, "{:<12} {:>24}", "sum", fmt_f64(r.component_energies.iter().sum()));
    let _ = writeln!(out, "{:<12} {:>24}", "signal", fmt_f64(r.total_energy));
    let _ = writeln!(out, "{:<12} {:>24}", "gap", fmt_f64(r.conservation_gap));
    let _ = writeln!(out, "conserved: {}", r.conserved);
    if r.unwanted_frequencies.is_empty() {
        let _ = writeln!(out, "unwanted: none");
    } else {
        let list: Vec<String> = r
            .unwanted_frequencies
            .iter()
            .map(|u| format!("{} (+{})", u.index, fmt_f64(u.excess)))
            .collect();
        let _ = writeln!(out, "unwanted: {}", list.join(", "));
    }
    out
}

/// Per-frequency magnitudes: `k, |s^|, sum |phi^|, difference, part_1..`.
pub fn energy_profile_csv(p: &SpectralProfile) -> String {
    let mut out = String::from("k,signal_abs,sum_abs,difference");
    for i in 0..p.parts.len() {
        if i + 1 == p.parts.len() {
            out.push_str(",trend_abs");
        } else {
            let _ = write!(out, ",imf{}_abs", i + 1);
        }
    }
    out.push('\n');
    for k in 0..p.signal.len() {
        let _ = write!(
            out,
            "{k},{},{},{}",
            fmt_f64(p.signal[k]),
            fmt_f64(p.summed[k]),
            fmt_f64(p.signal[k] - p.summed[k])
        );
        for part in &p.parts {
            let _ = write!(out, ",{}", fmt_f64(part[k]));
        }
        out.push('\n');
    }
    out
}
