//! Box counting of a sampled graph.
//!
//! Abscissae are taken on `[0, 1]` and ordinates are rescaled to `[0, 1]` by
//! their sampled range. For each dyadic scale the column of width `eps` is
//! covered from its lowest to its highest sampled value ("padded" count);
//! distinct occupied boxes are reported alongside ("raw" count).

use std::io::{self, Write};

use serde::Serialize;

use crate::dimension::fit::{least_squares, LineFit};
use crate::error::{Error, Result};
use crate::system::SystemSpec;
use crate::weierstrass::{oscillation_ratio, GraphSample, TruncationPlan};

/// Minimum samples per column at the finest scale before a warning is issued.
pub const MIN_POINTS_PER_COLUMN: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountResult {
    /// exponents `k` with `eps_k = 2^{-k}`
    pub exponents: Vec<u32>,
    pub scales: Vec<f64>,
    pub counts: Vec<u64>,
    pub raw_counts: Vec<u64>,
    pub slope: f64,
    pub stderr: f64,
    /// index range `[start, end)` of the scales used in the fit
    pub window: (usize, usize),
    pub warnings: Vec<String>,
}

impl BoxCountResult {
    /// CSV with header `scale,count`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "scale,count")?;
        for (e, c) in self.scales.iter().zip(&self.counts) {
            writeln!(out, "{e:.16e},{c}")?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope,
            "stderr": self.stderr,
            "window": [self.scales[self.window.0], self.scales[self.window.1 - 1]],
        })
    }

    /// Slope of the raw distinct-box counts over the same window.
    pub fn raw_slope(&self) -> Option<LineFit> {
        fit_window(&self.exponents, &self.raw_counts, self.window)
    }
}

fn fit_window(exponents: &[u32], counts: &[u64], window: (usize, usize)) -> Option<LineFit> {
    let xs: Vec<f64> = exponents[window.0..window.1].iter().map(|k| *k as f64).collect();
    let ys: Vec<f64> = counts[window.0..window.1].iter().map(|c| (*c as f64).log2()).collect();
    least_squares(&xs, &ys)
}

/// Counts at one scale; `points` must be sorted by abscissa. The padded range
/// of a column also reaches the last sample of the previous column and the
/// first sample of the next one, since the graph is connected across the
/// column boundary.
fn count_scale(points: &[(f64, f64)], pads: &[f64], k: u32) -> (u64, u64) {
    let columns = 1u64 << k;
    let cf = columns as f64;
    let col_of = |x: f64| ((x * cf) as u64).min(columns - 1);
    let row_of = |y: f64| ((y * cf) as u64).min(columns - 1);
    let (mut padded, mut raw) = (0u64, 0u64);
    let mut rows: Vec<u64> = Vec::new();
    let mut start = 0;
    while start < points.len() {
        let col = col_of(points[start].0);
        let mut end = start;
        rows.clear();
        while end < points.len() && col_of(points[end].0) == col {
            rows.push(row_of(points[end].1));
            end += 1;
        }
        let mut lo = row_of(points[start..end].iter().zip(&pads[start..end]).fold(f64::INFINITY, |m, (p, e)| m.min(p.1 - e)).max(0.0));
        let mut hi = row_of(points[start..end].iter().zip(&pads[start..end]).fold(f64::NEG_INFINITY, |m, (p, e)| m.max(p.1 + e)));
        for nb in [start.checked_sub(1), (end < points.len()).then_some(end)].into_iter().flatten() {
            let r = row_of(points[nb].1);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        padded += hi - lo + 1;
        rows.sort_unstable();
        rows.dedup();
        raw += rows.len() as u64;
        start = end;
    }
    (padded, raw)
}

/// Oscillation of `W` that a sample cannot resolve: for a point `x` with
/// spacing `delta`, half of `C lambda^N(x)` where `I_N(x)` is the first cylinder
/// not wider than `delta` and `C` is the median of measured ratios
/// `osc(I_n) / lambda^n` on coarse cylinders.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OscillationEnvelope {
    pub constant: f64,
    pub spacing: f64,
    pub probe_depth: usize,
}

impl OscillationEnvelope {
    /// Probes at depth 3, 32 cylinders, 2048 evaluations each.
    pub fn measure(spec: &SystemSpec<f64>, plan: &TruncationPlan<f64>, spacing: f64) -> Result<Self> {
        let probe_depth = 3;
        let probes = 32;
        let mut ratios: Vec<f64> = (0..probes)
            .map(|k| oscillation_ratio(spec, (k as f64 + 0.5) / probes as f64, probe_depth, 2048, plan))
            .collect::<Result<_>>()?;
        ratios.sort_by(f64::total_cmp);
        Ok(Self { constant: ratios[probes / 2], spacing, probe_depth })
    }

    pub fn pad(&self, spec: &SystemSpec<f64>, x: f64) -> f64 {
        let (mut z, mut width, mut weight) = (x, 1.0, 1.0);
        while width > self.spacing {
            let i = spec.symbol_of(z);
            width *= spec.width(i);
            weight *= spec.lambda_symbol(i);
            z = spec.tau(z);
        }
        0.5 * self.constant * weight
    }

    pub fn pads(&self, spec: &SystemSpec<f64>, sample: &GraphSample<f64>) -> Vec<f64> {
        use rayon::prelude::*;
        sample.points.par_iter().map(|(x, _)| self.pad(spec, *x)).collect()
    }
}

/// Box-counting slope over `eps = 2^{-k}`, `k` in `k0..=k1`. The fit drops the
/// two coarsest and two finest scales when at least three remain. `pads`, one
/// per sample point in units of `W`, widen each column's range.
pub fn box_count_graph(sample: &GraphSample<f64>, k0: u32, k1: u32, pads: Option<&[f64]>) -> Result<BoxCountResult> {
    if k1 <= k0 || k1 > 40 {
        return Err(Error::Domain(format!("scale range {k0}..{k1} is empty or too fine")));
    }
    if sample.len() < 2 {
        return Err(Error::InsufficientSamples("graph sample needs at least two points".into()));
    }
    if let Some(p) = pads {
        if p.len() != sample.len() || p.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::Domain("pads must be non-negative, one per sample point".into()));
        }
    }
    let mut order: Vec<usize> = (0..sample.len()).collect();
    order.sort_by(|&a, &b| sample.points[a].0.total_cmp(&sample.points[b].0));
    let mut pts: Vec<(f64, f64)> = order.iter().map(|&i| sample.points[i]).collect();
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite() || *x < 0.0 || *x > 1.0) {
        return Err(Error::Domain("graph sample must have finite values and abscissae in [0, 1]".into()));
    }
    let (ymin, ymax) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    let range = ymax - ymin;
    for p in &mut pts {
        p.1 = if range > 0.0 { (p.1 - ymin) / range } else { 0.0 };
    }
    let scaled_pads: Vec<f64> = match pads {
        Some(p) if range > 0.0 => order.iter().map(|&i| p[i] / range).collect(),
        _ => vec![0.0; pts.len()],
    };
    let raw_pads = vec![0.0; pts.len()];

    let exponents: Vec<u32> = (k0..=k1).collect();
    let counts: Vec<u64> = exponents.iter().map(|&k| count_scale(&pts, &scaled_pads, k).0).collect();
    let raw_counts: Vec<u64> = exponents.iter().map(|&k| count_scale(&pts, &raw_pads, k).1).collect();
    let scales: Vec<f64> = exponents.iter().map(|&k| (-(k as f64)).exp2()).collect();

    let n = exponents.len();
    let window = if n >= 7 { (2, n - 2) } else { (0, n) };
    let fit = fit_window(&exponents, &counts, window)
        .ok_or_else(|| Error::InsufficientSamples("fewer than two scales in the fit window".into()))?;

    let mut warnings = Vec::new();
    let per_column = pts.len() as f64 / (k1 as f64).exp2();
    if per_column < MIN_POINTS_PER_COLUMN as f64 {
        warnings.push(format!(
            "only {per_column:.2} samples per column at eps = 2^-{k1}; need {MIN_POINTS_PER_COLUMN}"
        ));
    }
    Ok(BoxCountResult { exponents, scales, counts, raw_counts, slope: fit.slope, stderr: fit.stderr, window, warnings })
}
