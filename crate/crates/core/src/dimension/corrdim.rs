//! Correlation dimension of a one-dimensional sample.

use std::io::{self, Write};

use serde::Serialize;

use crate::dimension::fit::least_squares;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrDimEstimate {
    pub radii: Vec<f64>,
    /// `C(r) = 2 #{i < j : |v_i - v_j| < r} / (n (n - 1))`
    pub values: Vec<f64>,
    pub slope: f64,
    pub stderr: f64,
    pub n: usize,
    /// index range `[start, end)` of the radii used in the fit
    pub window: (usize, usize),
    /// all sample values coincide
    pub degenerate: bool,
}

impl CorrDimEstimate {
    /// CSV with header `r,C`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "r,C")?;
        for (r, c) in self.radii.iter().zip(&self.values) {
            writeln!(out, "{r:.16e},{c:.16e}")?;
        }
        Ok(())
    }

    pub fn summary_json(&self) -> serde_json::Value {
        serde_json::json!({
            "slope": self.slope,
            "stderr": self.stderr,
            "window": [self.radii[self.window.0], self.radii[self.window.1 - 1]],
            "n": self.n,
            "degenerate": self.degenerate,
        })
    }
}

/// Number of pairs `i < j` with `|v_i - v_j| < r` in a sorted slice.
pub fn close_pairs(sorted: &[f64], r: f64) -> u64 {
    let mut count = 0u64;
    let mut lo = 0;
    for (j, v) in sorted.iter().enumerate() {
        while v - sorted[lo] >= r {
            lo += 1;
        }
        count += (j - lo) as u64;
    }
    count
}

/// `count` radii log-spaced between `lo` and `hi`.
pub fn log_radii(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// Default radii: 12 values log-spaced in `[1e-4, 1e-2]` times the sample range.
pub fn default_radii(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let range = hi - lo;
    if range > 0.0 {
        log_radii(1e-4 * range, 1e-2 * range, 12)
    } else {
        log_radii(1e-4, 1e-2, 12)
    }
}

/// Slope of `log C(r)` against `log r`. Radii with no close pair are left out
/// of the fit; the two smallest and two largest radii are dropped when at least
/// three remain.
pub fn correlation_dim(values: &[f64], radii: &[f64]) -> Result<CorrDimEstimate> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientSamples("correlation dimension needs two values".into()));
    }
    if values.iter().any(|v| !v.is_finite()) || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Domain("values must be finite and radii positive".into()));
    }
    let mut radii = radii.to_vec();
    radii.sort_by(f64::total_cmp);
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pairs = n as f64 * (n as f64 - 1.0) / 2.0;
    let vals: Vec<f64> = radii.iter().map(|r| close_pairs(&sorted, *r) as f64 / pairs).collect();
    let degenerate = sorted[0] == sorted[n - 1];
    if degenerate {
        let window = (0, radii.len());
        return Ok(CorrDimEstimate { radii, values: vals, slope: 0.0, stderr: 0.0, n, window, degenerate });
    }
    let usable: Vec<usize> = (0..radii.len()).filter(|&k| vals[k] > 0.0).collect();
    let first = *usable.first().ok_or_else(|| Error::InsufficientSamples("no pair closer than the largest radius".into()))?;
    let m = radii.len() - first;
    let window = if m >= 7 { (first + 2, radii.len() - 2) } else { (first, radii.len()) };
    let xs: Vec<f64> = radii[window.0..window.1].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = vals[window.0..window.1].iter().map(|c| c.ln()).collect();
    let fit = least_squares(&xs, &ys).ok_or_else(|| Error::InsufficientSamples("fewer than two usable radii".into()))?;
    Ok(CorrDimEstimate { radii, values: vals, slope: fit.slope, stderr: fit.stderr, n, window, degenerate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use proptest::prelude::*;
    use rand::Rng;

    fn brute(values: &[f64], r: f64) -> u64 {
        let mut c = 0;
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                if (values[i] - values[j]).abs() < r {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn uniform_sample_has_dimension_one() {
        let mut rng = stream_rng(12, 0);
        let v: Vec<f64> = (0..20_000).map(|_| rng.gen()).collect();
        let est = correlation_dim(&v, &default_radii(&v)).unwrap();
        assert!((est.slope - 1.0).abs() < 0.05, "{}", est.slope);
        assert!(est.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(!est.degenerate);
    }

    #[test]
    fn dirac_sample_is_degenerate() {
        let v = vec![0.0; 10_000];
        let est = correlation_dim(&v, &default_radii(&v)).unwrap();
        assert_eq!(est.slope, 0.0);
        assert!(est.degenerate);
    }

    #[test]
    fn cantor_sample_has_its_dimension() {
        // middle-thirds Cantor set: log 2 / log 3
        let mut rng = stream_rng(13, 0);
        let v: Vec<f64> = (0..20_000)
            .map(|_| (1..=30).map(|k| if rng.gen::<bool>() { 2.0 * 3f64.powi(-k) } else { 0.0 }).sum())
            .collect();
        let est = correlation_dim(&v, &log_radii(1e-4, 1e-1, 16)).unwrap();
        assert!((est.slope - 2f64.ln() / 3f64.ln()).abs() < 0.06, "{}", est.slope);
    }

    proptest! {
        #[test]
        fn two_pointer_count_matches_brute_force(v in prop::collection::vec(-1.0f64..1.0, 2..60), r in 0.001f64..0.5) {
            let mut s = v.clone();
            s.sort_by(f64::total_cmp);
            prop_assert_eq!(close_pairs(&s, r), brute(&v, r));
        }

        #[test]
        fn slope_is_invariant_under_affine_maps(seed in 0u64..50, a in 0.01f64..100.0, b in -10.0f64..10.0) {
            let mut rng = stream_rng(seed, 0);
            let v: Vec<f64> = (0..3000).map(|_| rng.gen::<f64>().powi(2)).collect();
            let w: Vec<f64> = v.iter().map(|x| a * x + b).collect();
            let e1 = correlation_dim(&v, &default_radii(&v)).unwrap();
            let e2 = correlation_dim(&w, &default_radii(&w)).unwrap();
            prop_assert!((e1.slope - e2.slope).abs() < 0.02);
        }
    }
}
