//! Pointwise dimension of the lifted measure `mu = (Id, W)_* nu_p`.
//!
//! Anchors and reference points are drawn independently from `nu_p` and
//! lifted to the graph. For each radius the primary estimate averages
//! `log mu(B_r(anchor))` over anchors and fits a line against `log r`; the
//! median of per-anchor slopes is reported as well.

use rayon::prelude::*;
use serde::Serialize;

use crate::dimension::fit::least_squares;
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::rng::derive_seed;
use crate::system::SystemSpec;
use crate::weierstrass::{eval_w, TruncationPlan};

/// A radius enters the fit only if its mean neighbour count reaches this.
pub const MIN_MEAN_NEIGHBOURS: f64 = 10.0;
/// ... and at most this fraction of anchors see no neighbour at all.
pub const MAX_EMPTY_FRACTION: f64 = 0.01;
/// Per-anchor fits use radii with at least this many neighbours.
pub const MIN_ANCHOR_NEIGHBOURS: u64 = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseDimResult {
    pub radii: Vec<f64>,
    /// mean over anchors of `log mu(B_r)`, anchors with empty balls left out
    pub mean_log_mass: Vec<f64>,
    pub mean_neighbours: Vec<f64>,
    pub usable: Vec<bool>,
    /// slope of `mean_log_mass` against `log r` over usable radii
    pub slope: f64,
    pub stderr: f64,
    pub median_slope: f64,
    /// first and third quartile of the per-anchor slopes
    pub slope_quartiles: (f64, f64),
    pub anchors: usize,
    pub references: usize,
}

/// Default radii `2^{-k}`, `k = 3..=12`.
pub fn default_radii() -> Vec<f64> {
    (3..=12).map(|k| (-(k as f64)).exp2()).collect()
}

fn sample_depth(spec: &SystemSpec<f64>) -> usize {
    let widest = spec.widths().into_iter().fold(0.0, f64::max);
    ((1e-15f64).ln() / widest.ln()).ceil() as usize
}

fn lifted(spec: &SystemSpec<f64>, measure: &BernoulliMeasure<f64>, n: usize, seed: u64, plan: &TruncationPlan<f64>) -> Vec<(f64, f64)> {
    measure
        .sample_points(spec, sample_depth(spec), n, seed)
        .into_par_iter()
        .map(|x| (x, eval_w(spec, x, plan)))
        .collect()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn pointwise_dim_mu(
    spec: &SystemSpec<f64>,
    measure: &BernoulliMeasure<f64>,
    references: usize,
    anchors: usize,
    radii: &[f64],
    plan: &TruncationPlan<f64>,
    seed: u64,
) -> Result<PointwiseDimResult> {
    if references < 2 || anchors < 1 {
        return Err(Error::InsufficientSamples("need at least two references and one anchor".into()));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    if radii.len() < 3 || !(radii[0] > 0.0) {
        return Err(Error::Domain("need at least three positive radii".into()));
    }
    let rmax = radii[radii.len() - 1];
    let mut refs = lifted(spec, measure, references, derive_seed(seed, "pointwise-references", 0), plan);
    refs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let anchor_pts = lifted(spec, measure, anchors, derive_seed(seed, "pointwise-anchors", 0), plan);

    // counts[a][k] = #{refs within radii[k] of anchor a}
    let counts: Vec<Vec<u64>> = anchor_pts
        .par_iter()
        .map(|&(xa, ya)| {
            let lo = refs.partition_point(|p| p.0 < xa - rmax);
            let hi = refs.partition_point(|p| p.0 <= xa + rmax);
            let mut hist = vec![0u64; radii.len()];
            for &(x, y) in &refs[lo..hi] {
                let d = (x - xa).hypot(y - ya);
                // smallest radius strictly larger than d
                let k = radii.partition_point(|r| *r <= d);
                if k < radii.len() {
                    hist[k] += 1;
                }
            }
            let mut acc = 0;
            for h in &mut hist {
                acc += *h;
                *h = acc;
            }
            hist
        })
        .collect();

    let nref = references as f64;
    let mut mean_log_mass = Vec::with_capacity(radii.len());
    let mut mean_neighbours = Vec::with_capacity(radii.len());
    let mut usable = Vec::with_capacity(radii.len());
    for k in 0..radii.len() {
        let nonzero: Vec<f64> = counts.iter().map(|c| c[k]).filter(|c| *c > 0).map(|c| c as f64).collect();
        let empty = 1.0 - nonzero.len() as f64 / anchors as f64;
        let mean_n = counts.iter().map(|c| c[k] as f64).sum::<f64>() / anchors as f64;
        let mlm = if nonzero.is_empty() {
            f64::NEG_INFINITY
        } else {
            nonzero.iter().map(|c| (c / nref).ln()).sum::<f64>() / nonzero.len() as f64
        };
        mean_log_mass.push(mlm);
        mean_neighbours.push(mean_n);
        usable.push(mean_n >= MIN_MEAN_NEIGHBOURS && empty <= MAX_EMPTY_FRACTION);
    }
    let idx: Vec<usize> = (0..radii.len()).filter(|&k| usable[k]).collect();
    let xs: Vec<f64> = idx.iter().map(|&k| radii[k].ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&k| mean_log_mass[k]).collect();
    let fit = if xs.len() >= 3 { least_squares(&xs, &ys) } else { None }
        .ok_or_else(|| Error::InsufficientSamples("fewer than three radii with enough neighbours".into()))?;

    let mut slopes: Vec<f64> = counts
        .iter()
        .filter_map(|c| {
            let ks: Vec<usize> = (0..radii.len()).filter(|&k| c[k] >= MIN_ANCHOR_NEIGHBOURS).collect();
            if ks.len() < 3 {
                return None;
            }
            let xs: Vec<f64> = ks.iter().map(|&k| radii[k].ln()).collect();
            let ys: Vec<f64> = ks.iter().map(|&k| (c[k] as f64 / nref).ln()).collect();
            least_squares(&xs, &ys).map(|f| f.slope)
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    let (median_slope, slope_quartiles) = if slopes.is_empty() {
        (f64::NAN, (f64::NAN, f64::NAN))
    } else {
        (quantile(&slopes, 0.5), (quantile(&slopes, 0.25), quantile(&slopes, 0.75)))
    };

    Ok(PointwiseDimResult {
        radii,
        mean_log_mass,
        mean_neighbours,
        usable,
        slope: fit.slope,
        stderr: fit.stderr,
        median_slope,
        slope_quartiles,
        anchors,
        references,
    })
}
