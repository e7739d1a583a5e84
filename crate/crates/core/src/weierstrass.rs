//! Evaluation of `W(x) = sum lambda^n(x) g(tau^n x)` and the skew products around it.
//!
//! `G(x, y) = (tau x, (y - g(x)) / lambda(x))` leaves the graph of `W`
//! invariant and repels everything else. Its inverse extension
//! `F(xi, x, y) = (B(xi, x), lambda(z) y + g(z))`, `z = rho_{k(xi)}(x)`,
//! attracts onto the graph; `B(xi, x) = (tau xi, rho_{k(xi)} x)` is the Baker map.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::Real;
use crate::system::SystemSpec;
use crate::twin::Twin;

/// Number of terms of the series together with the guaranteed absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationPlan<T> {
    pub depth: usize,
    pub tail_bound: T,
}

impl<T: Real> TruncationPlan<T> {
    /// Plan with a fixed depth and its geometric tail bound.
    pub fn with_depth(spec: &SystemSpec<T>, depth: usize) -> Self {
        Self { depth, tail_bound: tail_bound(spec, depth) }
    }
}

fn tail_bound<T: Real>(spec: &SystemSpec<T>, depth: usize) -> T {
    let lam = spec.lambda_max();
    spec.g_sup_norm() * lam.powi(depth as i32) / (T::one() - lam)
}

/// Smallest depth `N` with `||g|| lambda_max^N / (1 - lambda_max) <= tol`.
pub fn truncation_depth<T: Real>(spec: &SystemSpec<T>, tol: T) -> Result<TruncationPlan<T>> {
    if !(tol > T::zero()) {
        return Err(Error::NonPositiveTolerance(tol.as_f64()));
    }
    let lam = spec.lambda_max();
    let norm = spec.g_sup_norm();
    if norm == T::zero() || tol >= norm / (T::one() - lam) {
        return Ok(TruncationPlan::with_depth(spec, 0));
    }
    let guess = ((tol * (T::one() - lam) / norm).ln() / lam.ln()).ceil();
    let mut n = guess.to_usize().unwrap_or(0);
    while tail_bound(spec, n) > tol {
        n += 1;
    }
    while n > 0 && tail_bound(spec, n - 1) <= tol {
        n -= 1;
    }
    Ok(TruncationPlan::with_depth(spec, n))
}

/// Depth beyond which `lambda^n` is accumulated in log space.
const LOG_SPACE_DEPTH: usize = 700;

/// `W_n(x) = sum_{j<n} lambda^j(x) g(tau^j x)`.
pub fn partial_sum<T: Real>(spec: &SystemSpec<T>, x: T, n: usize) -> T {
    partial_sum_twin(spec, Twin::new(x), n)
}

/// [`partial_sum`] at a double-word point; the orbit is carried in double-word
/// arithmetic and `g` is evaluated at the rounded orbit points.
pub fn partial_sum_twin<T: Real>(spec: &SystemSpec<T>, x: Twin<T>, n: usize) -> T {
    let mut z = x;
    let mut sum = T::zero();
    if n > LOG_SPACE_DEPTH {
        let mut log_weight = T::zero();
        for _ in 0..n {
            let i = spec.symbol_of_twin(z);
            sum = sum + log_weight.exp() * spec.g(z.value());
            log_weight = log_weight + spec.lambda_symbol(i).ln();
            z = spec.tau_branch_twin(i, z);
        }
    } else {
        let mut weight = T::one();
        for _ in 0..n {
            let i = spec.symbol_of_twin(z);
            sum = sum + weight * spec.g(z.value());
            weight = weight * spec.lambda_symbol(i);
            z = spec.tau_branch_twin(i, z);
        }
    }
    sum
}

/// `W_n` along a plain floating-point orbit. Rounding errors grow like
/// `tau'^n`, so this is only accurate to roughly `eps^alpha`.
pub fn partial_sum_float<T: Real>(spec: &SystemSpec<T>, x: T, n: usize) -> T {
    let mut z = x;
    let mut sum = T::zero();
    let mut weight = T::one();
    for _ in 0..n {
        let i = spec.symbol_of(z);
        sum = sum + weight * spec.g(z);
        weight = weight * spec.lambda_symbol(i);
        z = (z - spec.left(i)) / spec.width(i);
    }
    sum
}

/// `lambda^n(x) = lambda(x) lambda(tau x) ... lambda(tau^{n-1} x)`.
pub fn lambda_power<T: Real>(spec: &SystemSpec<T>, x: T, n: usize) -> T {
    spec.lambda_power_word(spec.coding_word(x, n).symbols())
}

/// `W(x)` truncated according to `plan`.
pub fn eval_w<T: Real>(spec: &SystemSpec<T>, x: T, plan: &TruncationPlan<T>) -> T {
    partial_sum(spec, x, plan.depth)
}

pub fn eval_w_twin<T: Real>(spec: &SystemSpec<T>, x: Twin<T>, plan: &TruncationPlan<T>) -> T {
    partial_sum_twin(spec, x, plan.depth)
}

/// Sampled graph of `W`.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample<T> {
    pub points: Vec<(T, T)>,
    pub plan: TruncationPlan<T>,
}

impl<T: Real> GraphSample<T> {
    /// `W` at the given abscissae; output order follows input order.
    pub fn at(spec: &SystemSpec<T>, xs: &[T], plan: TruncationPlan<T>) -> Self {
        let points = xs.par_iter().map(|&x| (x, eval_w(spec, x, &plan))).collect();
        Self { points, plan }
    }

    /// `n` equispaced abscissae `k / (n - 1)` on `[0, 1]`.
    pub fn uniform(spec: &SystemSpec<T>, n: usize, plan: TruncationPlan<T>) -> Self {
        let denom = T::from_usize_lossy(n.saturating_sub(1).max(1));
        let points = (0..n)
            .into_par_iter()
            .map(|k| {
                let x = T::from_usize_lossy(k) / denom;
                (x, eval_w(spec, x, &plan))
            })
            .collect();
        Self { points, plan }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// CSV with header `x,w`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,w")?;
        for (x, w) in &self.points {
            writeln!(out, "{x:.16e},{w:.16e}")?;
        }
        Ok(())
    }
}

/// `G^n(x, y)`. Off-graph points are pushed to infinity; a non-finite fibre
/// value is reported as divergence.
pub fn skew_forward<T: Real>(spec: &SystemSpec<T>, x: T, y: T, n: usize) -> Result<(T, T)> {
    let (x, y) = skew_forward_twin(spec, Twin::new(x), y, n)?;
    Ok((x.value(), y))
}

/// [`skew_forward`] with the base point carried in double-word arithmetic.
pub fn skew_forward_twin<T: Real>(spec: &SystemSpec<T>, x: Twin<T>, y: T, n: usize) -> Result<(Twin<T>, T)> {
    let (mut x, mut y) = (x, y);
    for step in 0..n {
        let i = spec.symbol_of_twin(x);
        y = (y - spec.g(x.value())) / spec.lambda_symbol(i);
        x = spec.tau_branch_twin(i, x);
        if !y.is_finite() {
            return Err(Error::Diverged { step: step + 1 });
        }
    }
    Ok((x, y))
}

/// `|G(x, W(x))_2 - W(tau x)|`: how far one step of `G` moves a graph point
/// off the graph.
pub fn graph_lift_residual<T: Real>(spec: &SystemSpec<T>, x: T, plan: &TruncationPlan<T>) -> T {
    let w = eval_w(spec, x, plan);
    match skew_forward_twin(spec, Twin::new(x), w, 1) {
        Ok((x1, y1)) => (y1 - eval_w_twin(spec, x1, plan)).abs(),
        Err(_) => T::infinity(),
    }
}

/// Baker map `B(xi, x) = (tau xi, rho_{k(xi)} x)`.
pub fn baker<T: Real>(spec: &SystemSpec<T>, xi: T, x: T) -> (T, T) {
    let k = spec.symbol_of(xi);
    (spec.tau(xi), spec.inverse_branch(k, x))
}

/// `B^{-1}(xi, x) = (rho_{k(x)} xi, tau x)`.
pub fn baker_inverse<T: Real>(spec: &SystemSpec<T>, xi: T, x: T) -> (T, T) {
    let k = spec.symbol_of(x);
    (spec.inverse_branch(k, xi), spec.tau(x))
}

/// One application of `F`.
pub fn skew_inverse_step<T: Real>(spec: &SystemSpec<T>, xi: T, x: T, y: T) -> (T, T, T) {
    let k = spec.symbol_of(xi);
    let z = spec.inverse_branch(k, x);
    (spec.tau(xi), z, spec.lambda_symbol(k) * y + spec.g(z))
}

/// Fibre part of `F^n` for a past given by its symbols:
/// `F^n_{(xi,x)}(y) = lambda^n(z_n) y + W_n(z_n)`, `z_n = rho_{[xi]_n}(x)`.
/// Returns `(z_n, F^n(y))`.
pub fn fibre_map_word<T: Real>(spec: &SystemSpec<T>, past: &[usize], x: T, y: T) -> (T, T) {
    let mut zs = Vec::with_capacity(past.len());
    let mut z = x;
    for &w in past {
        z = spec.inverse_branch(w, z);
        zs.push(z);
    }
    let n = past.len();
    let mut weight = T::one();
    let mut w_n = T::zero();
    // W_n(z_n) = sum_j lambda^j(z_n) g(tau^j z_n) with tau^j z_n = z_{n-j}
    for j in 0..n {
        let idx = n - 1 - j;
        w_n = w_n + weight * spec.g(zs[idx]);
        weight = weight * spec.lambda_symbol(past[idx]);
    }
    (z, weight * y + w_n)
}

/// `F^n(xi, x, y) = (B^n(xi, x), F^n_{(xi,x)}(y))` in closed form.
pub fn skew_inverse_fibre<T: Real>(spec: &SystemSpec<T>, xi: T, x: T, y: T, n: usize) -> (T, T, T) {
    if n == 0 {
        return (xi, x, y);
    }
    let word = spec.coding_word(xi, n);
    let mut xi_n = xi;
    for _ in 0..n {
        xi_n = spec.tau(xi_n);
    }
    let (z, fy) = fibre_map_word(spec, word.symbols(), x, y);
    (xi_n, z, fy)
}

/// `|lambda(z) W(x) + g(z) - W(z)|` for `z = rho_{k(xi)}(x)`; bounded by twice the tail.
pub fn invariance_residual<T: Real>(spec: &SystemSpec<T>, xi: T, x: T, plan: &TruncationPlan<T>) -> T {
    let k = spec.symbol_of(xi);
    // z is kept in double-word form: rounding it would move W by about eps^alpha
    let z = spec.inverse_branch_twin(k, Twin::new(x));
    let fy = spec.lambda_symbol(k) * eval_w(spec, x, plan) + spec.g(z.value());
    (fy - eval_w_twin(spec, z, plan)).abs()
}

/// `max - min` of `W` over `samples` midpoints of `I_N(x)` divided by `lambda^N(x)`.
pub fn oscillation_ratio<T: Real>(
    spec: &SystemSpec<T>,
    x: T,
    depth: usize,
    samples: usize,
    plan: &TruncationPlan<T>,
) -> Result<T> {
    if samples < 2 {
        return Err(Error::Domain("oscillation needs at least 2 samples".into()));
    }
    let word = spec.coding_word(x, depth);
    let cyl = spec.cylinder_of(&word);
    let osc = oscillation_on(spec, cyl.left, cyl.right, samples, plan);
    Ok(osc / spec.lambda_power_word(word.symbols()))
}

/// `max - min` of `W` over `samples` midpoints of `[left, right)`.
pub fn oscillation_on<T: Real>(spec: &SystemSpec<T>, left: T, right: T, samples: usize, plan: &TruncationPlan<T>) -> T {
    let n = T::from_usize_lossy(samples);
    let (lo, hi) = (0..samples)
        .map(|k| {
            let u = (T::from_usize_lossy(k) + T::lit(0.5)) / n;
            eval_w(spec, left + (right - left) * u, plan)
        })
        .fold((T::infinity(), T::neg_infinity()), |(lo, hi), w| (lo.min(w), hi.max(w)));
    hi - lo
}
