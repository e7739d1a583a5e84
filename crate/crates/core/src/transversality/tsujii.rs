//! Correlation integrals of the conditional slope distributions
//! `zeta_{p,x} = law of Theta(., x)` under `nu_p`, the `beta` recursion and the
//! self-similarity of `zeta_{p,x}`.
//!
//! With `B_r` the ball of radius `r`,
//! `||nu||_r^2 = int nu(B_r(y))^2 dy = E max(0, 2r - |a - b|)` for independent
//! `a, b ~ nu`, and `I_p(r) = r^{-2} int ||zeta_{p,x}||_r^2 dnu_p(x)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dimension::corrdim::{correlation_dim, default_radii, CorrDimEstimate};
use crate::error::{Error, Result};
use crate::fibres::{past_point, ThetaField, ThetaSamples};
use crate::measure::BernoulliMeasure;
use crate::rng::{derive_seed, stream_rng};
use crate::system::SystemSpec;
use crate::transversality::conditions::{alpha_bound, beta_constant};
use crate::weierstrass::TruncationPlan;

/// Pairs closer than `2r` needed before a radius counts as resolved.
pub const MIN_CLOSE_PAIRS: u64 = 100;

/// Truncation tail of `Theta` in the self-similarity check; far below the
/// resolution of the KS statistic, and the identity is exact at any depth.
pub const SELF_SIMILARITY_TOL: f64 = 1e-6;

/// Depth of the `nu_p`-distributed base points `x`.
const BASE_POINT_DEPTH: usize = 48;

/// `(sum over pairs a < b of max(0, 2r - |v_a - v_b|), number of such pairs
/// closer than 2r)` for sorted values.
fn pair_kernel_sum(sorted: &[f64], r: f64) -> (f64, u64) {
    let two_r = 2.0 * r;
    let mut lo = 0;
    let mut total = 0.0;
    let mut close = 0u64;
    for (j, &v) in sorted.iter().enumerate() {
        while v - sorted[lo] >= two_r {
            lo += 1;
        }
        total += sorted[lo..j].iter().map(|a| two_r - (v - a)).sum::<f64>();
        close += (j - lo) as u64;
    }
    (total, close)
}

/// U-statistic for `E max(0, 2r - |a - b|)` from a sample of `nu`.
pub fn pair_kernel_mean(values: &[f64], r: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    pair_kernel_sum(&v, r).0 / (n * (n - 1.0) / 2.0)
}

/// `||nu||_r^2` for a discrete measure, from the definition: `y -> nu(B_r(y))`
/// is piecewise constant between the points `p +- r`.
pub fn ball_norm_exact(atoms: &[(f64, f64)], r: f64) -> f64 {
    let mut cuts: Vec<f64> = atoms.iter().flat_map(|(p, _)| [p - r, p + r]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|c| {
            let mid = 0.5 * (c[0] + c[1]);
            let mass: f64 = atoms.iter().filter(|(p, _)| (mid - p).abs() < r).map(|(_, w)| w).sum();
            mass * mass * (c[1] - c[0])
        })
        .sum()
}

/// `sum_{a,b} w_a w_b max(0, 2r - |p_a - p_b|)` for a discrete measure.
pub fn ball_norm_pairs(atoms: &[(f64, f64)], r: f64) -> f64 {
    atoms
        .iter()
        .flat_map(|a| atoms.iter().map(move |b| a.1 * b.1 * (2.0 * r - (a.0 - b.0).abs()).max(0.0)))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CorrelationSampling {
    /// base points `x ~ nu_p`
    pub fibres: usize,
    /// pasts drawn per base point
    pub per_fibre: usize,
}

impl Default for CorrelationSampling {
    fn default() -> Self {
        Self { fibres: 256, per_fibre: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationIntegral {
    pub r: f64,
    pub value: f64,
    /// standard error over base points
    pub stderr: f64,
    pub fibres: usize,
    pub per_fibre: usize,
    /// pairs closer than `2r`, summed over base points
    pub close_pairs: u64,
    pub starved: bool,
    /// truncation depth of `Theta`, chosen so that its tail is below `r / 10`
    pub depth: usize,
}

fn theta_sample(field: &ThetaField<'_, f64>, measure: &BernoulliMeasure<f64>, x: f64, n: usize, seed: u64) -> Vec<f64> {
    let plan = TruncationPlan::with_depth(field.spec(), 0);
    (0..n)
        .map(|k| {
            let w = measure.draw_word(field.depth(), &mut stream_rng(seed, k as u64));
            field.theta(&w, x, &plan)
        })
        .collect()
}

fn require_locally_constant(spec: &SystemSpec<f64>) -> Result<()> {
    if !spec.lambda_is_locally_constant() {
        return Err(Error::Unsupported("slope distributions need lambda' == 0".into()));
    }
    Ok(())
}

/// Monte-Carlo `I_p(r)`.
pub fn correlation_integral(
    spec: &SystemSpec<f64>,
    measure: &BernoulliMeasure<f64>,
    r: f64,
    sampling: CorrelationSampling,
    seed: u64,
) -> Result<CorrelationIntegral> {
    require_locally_constant(spec)?;
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if sampling.fibres < 2 || sampling.per_fibre < 2 {
        return Err(Error::InsufficientSamples("need at least two base points and two pasts each".into()));
    }
    if measure.alphabet() != spec.branches() {
        return Err(Error::InvalidMeasure("measure alphabet differs from the number of branches".into()));
    }
    let field = ThetaField::for_tolerance(spec, r / 10.0)?;
    let base_seed = derive_seed(seed, "correlation-integral-base", 0);
    let per: Vec<(f64, u64)> = (0..sampling.fibres)
        .into_par_iter()
        .map(|k| {
            let x = measure.draw_point(spec, BASE_POINT_DEPTH, &mut stream_rng(base_seed, k as u64));
            let mut v = theta_sample(&field, measure, x, sampling.per_fibre, derive_seed(seed, "correlation-integral-pasts", k as u64));
            v.sort_by(f64::total_cmp);
            let (s, close) = pair_kernel_sum(&v, r);
            let m = sampling.per_fibre as f64;
            (s / (m * (m - 1.0) / 2.0) / (r * r), close)
        })
        .collect();
    let n = per.len() as f64;
    let mean = per.iter().map(|p| p.0).sum::<f64>() / n;
    let var = per.iter().map(|p| (p.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let close_pairs = per.iter().map(|p| p.1).sum();
    Ok(CorrelationIntegral {
        r,
        value: mean,
        stderr: (var / n).sqrt(),
        fibres: sampling.fibres,
        per_fibre: sampling.per_fibre,
        close_pairs,
        starved: close_pairs < MIN_CLOSE_PAIRS,
        depth: field.depth(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionCheck {
    pub beta: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    /// `8 delta^{-1} max(4 alpha / eps, 1)`
    pub constant: f64,
    pub integrals: Vec<CorrelationIntegral>,
    /// `I(r_k) - beta I(r_{k-1}) - constant` for `k >= 1`
    pub residuals: Vec<f64>,
    /// combined standard error of each residual
    pub sigmas: Vec<f64>,
    /// `beta^k I(r_0) + constant / (1 - beta)`; empty when `beta >= 1`
    pub bounds: Vec<f64>,
    /// indices `k` where an inequality fails by more than three standard errors
    pub violations: Vec<usize>,
    pub holds: bool,
}

/// Radii `r_k = eps (min gamma)^k / 8`, `k = 0..levels`.
pub fn recursion_radii(spec: &SystemSpec<f64>, epsilon: f64, levels: usize) -> Vec<f64> {
    let g = spec.gamma_min();
    (0..levels).map(|k| epsilon * g.powi(k as i32) / 8.0).collect()
}

/// Checks `I(r) <= beta I(r / min gamma) + 8 delta^{-1} max(4 alpha / eps, 1)`
/// on the radii `r_k` with three standard errors of slack. Each radius uses an
/// independent seed stream.
pub fn beta_and_recursion_check(
    spec: &SystemSpec<f64>,
    measure: &BernoulliMeasure<f64>,
    epsilon: f64,
    delta: f64,
    levels: usize,
    sampling: CorrelationSampling,
    seed: u64,
) -> Result<RecursionCheck> {
    if !(epsilon > 0.0) || !(delta > 0.0) {
        return Err(Error::Domain(format!("transversality constants must be positive, got eps = {epsilon}, delta = {delta}")));
    }
    if levels < 2 {
        return Err(Error::Domain("need at least two radii".into()));
    }
    let beta = beta_constant(spec);
    let alpha = alpha_bound(spec);
    let constant = 8.0 / delta * (4.0 * alpha / epsilon).max(1.0);
    let integrals = recursion_radii(spec, epsilon, levels)
        .into_iter()
        .enumerate()
        .map(|(k, r)| correlation_integral(spec, measure, r, sampling, derive_seed(seed, "recursion-radius", k as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut residuals = Vec::new();
    let mut sigmas = Vec::new();
    let mut violations = Vec::new();
    for k in 1..levels {
        let (cur, prev) = (&integrals[k], &integrals[k - 1]);
        let res = cur.value - beta * prev.value - constant;
        let sigma = (cur.stderr.powi(2) + (beta * prev.stderr).powi(2)).sqrt();
        if res > 3.0 * sigma {
            violations.push(k);
        }
        residuals.push(res);
        sigmas.push(sigma);
    }
    let mut bounds = Vec::new();
    if beta < 1.0 {
        let i0 = integrals[0].value;
        for (k, ci) in integrals.iter().enumerate() {
            let b = beta.powi(k as i32) * i0 + constant / (1.0 - beta);
            if ci.value - b > 3.0 * (ci.stderr.powi(2) + (beta.powi(k as i32) * integrals[0].stderr).powi(2)).sqrt() && !violations.contains(&k) {
                violations.push(k);
            }
            bounds.push(b);
        }
    }
    violations.sort_unstable();
    let holds = violations.is_empty();
    Ok(RecursionCheck { beta, epsilon, delta, alpha, constant, integrals, residuals, sigmas, bounds, violations, holds })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsCheck {
    pub x: f64,
    pub n: usize,
    pub distance: f64,
    /// `1.63 sqrt(2 / n)`, the two-sample critical value at level 1%
    pub critical: f64,
    pub passes: bool,
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Compares `n` samples of `zeta_{p,x}` with `n` samples of the mixture
/// `sum_i q_i f_* zeta_{p, rho_i(x)}`, where `f` acts on fibres by
/// `y -> gamma_i (y - g'(rho_i x))`. The identity holds for `q = p`.
/// Both samples use `Theta` truncated at the same total depth, so the
/// identity is exact in law.
pub fn selfsimilarity_with_mixture(
    spec: &SystemSpec<f64>,
    measure: &BernoulliMeasure<f64>,
    mixture: &BernoulliMeasure<f64>,
    x: f64,
    n: usize,
    seed: u64,
) -> Result<KsCheck> {
    require_locally_constant(spec)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("base point must lie in [0, 1], got {x}")));
    }
    if n < 2 {
        return Err(Error::InsufficientSamples("need at least two samples".into()));
    }
    let field = ThetaField::for_tolerance(spec, SELF_SIMILARITY_TOL)?;
    let shorter = ThetaField::new(spec, field.depth().saturating_sub(1));
    let plan = TruncationPlan::with_depth(spec, 0);
    let direct_seed = derive_seed(seed, "selfsimilarity-direct", 0);
    let mixture_seed = derive_seed(seed, "selfsimilarity-mixture", 0);
    let direct: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let w = measure.draw_word(field.depth(), &mut stream_rng(direct_seed, k as u64));
            field.theta(&w, x, &plan)
        })
        .collect();
    let mixed: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(mixture_seed, k as u64);
            let i = mixture.draw_symbol(&mut rng);
            let w = measure.draw_word(shorter.depth(), &mut rng);
            let z = spec.inverse_branch(i, x);
            let v = if shorter.depth() == 0 { 0.0 } else { shorter.theta(&w, z, &plan) };
            spec.gamma_symbol(i) * (v - spec.g_prime(z))
        })
        .collect();
    let distance = ks_distance(&direct, &mixed);
    let critical = 1.63 * (2.0 / n as f64).sqrt();
    Ok(KsCheck { x, n, distance, critical, passes: distance <= critical })
}

/// [`selfsimilarity_with_mixture`] with the true weights.
pub fn selfsimilarity_check(spec: &SystemSpec<f64>, measure: &BernoulliMeasure<f64>, x: f64, n: usize, seed: u64) -> Result<KsCheck> {
    selfsimilarity_with_mixture(spec, measure, measure, x, n, seed)
}

/// Weights with the first two entries exchanged.
pub fn swapped(measure: &BernoulliMeasure<f64>) -> Result<BernoulliMeasure<f64>> {
    let mut p = measure.probabilities().to_vec();
    if p.len() < 2 {
        return Err(Error::InvalidMeasure("need two symbols to swap".into()));
    }
    p.swap(0, 1);
    BernoulliMeasure::new(p)
}

/// `n` samples `(xi, x, Theta(xi, x))` of `zeta_{p,x}`, `xi` being the
/// cylinder midpoint of the drawn past.
pub fn theta_distribution_sample(
    spec: &SystemSpec<f64>,
    measure: &BernoulliMeasure<f64>,
    x: f64,
    n: usize,
    seed: u64,
) -> Result<ThetaSamples<f64>> {
    require_locally_constant(spec)?;
    let field = ThetaField::for_tolerance(spec, 1e-9)?;
    let s = derive_seed(seed, "theta-distribution", 0);
    let plan = TruncationPlan::with_depth(spec, 0);
    let rows = (0..n)
        .into_par_iter()
        .map(|k| {
            let w = measure.draw_word(field.depth(), &mut stream_rng(s, k as u64));
            (past_point(spec, &w), x, field.theta(&w, x, &plan))
        })
        .collect();
    Ok(ThetaSamples { rows })
}

/// Correlation dimension of `n` samples of `zeta_{p,x}`.
pub fn theta_distribution_dim(
    spec: &SystemSpec<f64>,
    measure: &BernoulliMeasure<f64>,
    x: f64,
    n: usize,
    seed: u64,
) -> Result<CorrDimEstimate> {
    let values: Vec<f64> = theta_distribution_sample(spec, measure, x, n, seed)?.rows.iter().map(|r| r.2).collect();
    correlation_dim(&values, &default_radii(&values))
}
