//! Empirical `(eps, delta)`-transversality margin on finite grids.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fibres::ThetaField;
use crate::system::SystemSpec;
use crate::weierstrass::TruncationPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScanGrid {
    pub xi: usize,
    pub eta: usize,
    pub x: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        Self { xi: 64, eta: 64, x: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub i: usize,
    pub j: usize,
    /// `min over (xi, eta, x) of max(|dTheta|, |dTheta'|)`
    pub margin: f64,
    pub xi_word: Vec<usize>,
    pub eta_word: Vec<usize>,
    pub x: f64,
    pub delta_theta: f64,
    pub delta_theta_dx: f64,
    pub depth: usize,
    pub grid: ScanGrid,
}

/// Pasts in `I_i` at `a_i + |I_i| k / n`, coded to `depth` symbols.
fn past_words(spec: &SystemSpec<f64>, i: usize, n: usize, depth: usize) -> Vec<Vec<usize>> {
    (0..n)
        .map(|k| {
            let xi = spec.left(i) + spec.width(i) * (k as f64 / n as f64);
            let mut w = spec.coding_word(xi, depth).symbols().to_vec();
            // rounding can only move the grid point of k = 0 or the last one
            w[0] = i;
            w
        })
        .collect()
}

/// `Theta` and its one-sided `x`-derivative along the `x` grid, per past.
fn profiles(field: &ThetaField<'_, f64>, words: &[Vec<usize>], xs: &[f64]) -> Result<Vec<Vec<(f64, f64)>>> {
    let plan = TruncationPlan::with_depth(field.spec(), 0);
    words
        .par_iter()
        .map(|w| xs.iter().map(|&x| Ok((field.theta(w, x, &plan), field.theta_dx_right(w, x)?))).collect())
        .collect()
}

/// Transversality margin between pasts starting with `i` and pasts starting
/// with `j`. Pasts are represented by depth-`depth` words; the `x` grid is
/// `k / grid.x`, `k = 0..=grid.x`, so doubling a grid only adds points.
pub fn eps_delta_scan(spec: &SystemSpec<f64>, i: usize, j: usize, grid: ScanGrid, depth: usize) -> Result<ScanResult> {
    let l = spec.branches();
    if i == j || i >= l || j >= l {
        return Err(Error::Domain(format!("scan needs two distinct symbols below {l}, got {i} and {j}")));
    }
    if grid.xi == 0 || grid.eta == 0 || grid.x == 0 || depth == 0 {
        return Err(Error::Domain("scan grids and depth must be positive".into()));
    }
    let field = ThetaField::new(spec, depth);
    let xs: Vec<f64> = (0..=grid.x).map(|k| k as f64 / grid.x as f64).collect();
    let xi_words = past_words(spec, i, grid.xi, depth);
    let eta_words = past_words(spec, j, grid.eta, depth);
    let a = profiles(&field, &xi_words, &xs)?;
    let b = profiles(&field, &eta_words, &xs)?;

    let (margin, (ka, kb, kx)) = (0..a.len())
        .into_par_iter()
        .map(|ka| {
            let mut best = (f64::INFINITY, (ka, 0, 0));
            for (kb, pb) in b.iter().enumerate() {
                for (kx, (va, vb)) in a[ka].iter().zip(pb).enumerate() {
                    let m = (va.0 - vb.0).abs().max((va.1 - vb.1).abs());
                    if m < best.0 {
                        best = (m, (ka, kb, kx));
                    }
                }
            }
            best
        })
        .reduce(|| (f64::INFINITY, (0, 0, 0)), |p, q| if q.0 < p.0 || (q.0 == p.0 && q.1 < p.1) { q } else { p });

    let (va, vb) = (a[ka][kx], b[kb][kx]);
    Ok(ScanResult {
        i,
        j,
        margin,
        xi_word: xi_words[ka].clone(),
        eta_word: eta_words[kb].clone(),
        x: xs[kx],
        delta_theta: va.0 - vb.0,
        delta_theta_dx: va.1 - vb.1,
        depth,
        grid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{DisplacementKind, LambdaKind};

    fn system_b() -> SystemSpec<f64> {
        SystemSpec::new(SystemSpec::equal_partition(3), LambdaKind::TauPower { theta: 0.2 }, DisplacementKind::Cosine)
    }

    #[test]
    fn certified_system_has_positive_margin() {
        let s = system_b();
        let g = ScanGrid { xi: 16, eta: 16, x: 64 };
        let r = eps_delta_scan(&s, 0, 1, g, 24).unwrap();
        assert!(r.margin > 0.0, "{r:?}");
        assert_eq!(r.xi_word[0], 0);
        assert_eq!(r.eta_word[0], 1);
        assert!((r.margin - r.delta_theta.abs().max(r.delta_theta_dx.abs())).abs() < 1e-15);
    }

    #[test]
    fn margin_is_symmetric_and_monotone_in_refinement() {
        let s = system_b();
        let coarse = ScanGrid { xi: 8, eta: 8, x: 32 };
        let fine = ScanGrid { xi: 16, eta: 16, x: 64 };
        let a = eps_delta_scan(&s, 0, 2, coarse, 20).unwrap();
        let b = eps_delta_scan(&s, 2, 0, coarse, 20).unwrap();
        assert_eq!(a.margin, b.margin);
        let f = eps_delta_scan(&s, 0, 2, fine, 20).unwrap();
        assert!(f.margin <= a.margin);
    }

    #[test]
    fn degenerate_system_has_zero_margin() {
        let s = SystemSpec::new(
            SystemSpec::equal_partition(3),
            LambdaKind::ConstantPerInterval(vec![0.6; 3]),
            DisplacementKind::PiecewiseLinear { slopes: vec![0.0; 3], intercepts: vec![0.5, 0.1, 0.3] },
        );
        let r = eps_delta_scan(&s, 0, 1, ScanGrid { xi: 4, eta: 4, x: 8 }, 10).unwrap();
        assert_eq!(r.margin, 0.0);
    }

    #[test]
    fn bad_arguments() {
        let s = system_b();
        assert!(eps_delta_scan(&s, 1, 1, ScanGrid::default(), 10).is_err());
        assert!(eps_delta_scan(&s, 0, 3, ScanGrid::default(), 10).is_err());
        assert!(eps_delta_scan(&s, 0, 1, ScanGrid { xi: 0, eta: 1, x: 1 }, 10).is_err());
    }
}
