//! Sufficient conditions for equality of Hausdorff and box dimension of the
//! graph, and the correlation-integral machinery behind them.

pub mod conditions;
pub mod scan;
pub mod sweep;
pub mod tsujii;

pub use conditions::{
    alpha_bound, beta_constant, cosine_lemma_check, delta0_compute, g_eval, thm_example2_check, CosineLemma, Delta0,
    Example2Check, PairMargin,
};
pub use scan::{eps_delta_scan, ScanGrid, ScanResult};
pub use sweep::{example_sweep, ExampleFamily, SweepOptions, SweepRow, SweepTable};
pub use tsujii::{
    beta_and_recursion_check, correlation_integral, selfsimilarity_check, selfsimilarity_with_mixture,
    theta_distribution_dim, theta_distribution_sample, CorrelationIntegral, CorrelationSampling, KsCheck, RecursionCheck,
};

use serde::Serialize;

use crate::error::Result;
use crate::system::{DisplacementKind, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransversalityReport {
    pub delta0: Delta0<f64>,
    /// present for cosine displacement
    pub cosine_lemma: Option<CosineLemma<f64>>,
    /// present for cosine displacement with `lambda = tau'^{-theta}`
    pub example2: Option<Example2Check<f64>>,
    /// true only when both conditions of the cosine / tau-power theorem hold
    pub analytic_verdict: bool,
    pub scans: Vec<ScanResult>,
    /// smallest scan margin, used for both `eps` and `delta`
    pub epsilon: f64,
    pub delta: f64,
    pub alpha: f64,
    pub beta: f64,
    /// `2 - theta` when the verdict is true
    pub claimed_dim: Option<f64>,
}

/// Analytic conditions plus a scan over every pair `i < j`.
pub fn transversality_report(spec: &SystemSpec<f64>, grid: ScanGrid, depth: usize) -> Result<TransversalityReport> {
    let cosine = matches!(spec.displacement(), DisplacementKind::Cosine);
    let cosine_lemma = if cosine && spec.lambda_is_locally_constant() { Some(cosine_lemma_check(spec)?) } else { None };
    let example2 = thm_example2_check(spec).ok();
    let analytic_verdict = example2.as_ref().is_some_and(|c| c.certified);
    let l = spec.branches();
    let mut scans = Vec::new();
    for i in 0..l {
        for j in (i + 1)..l {
            scans.push(eps_delta_scan(spec, i, j, grid, depth)?);
        }
    }
    let margin = scans.iter().map(|s| s.margin).fold(f64::INFINITY, f64::min);
    Ok(TransversalityReport {
        delta0: delta0_compute(spec, 1024),
        cosine_lemma,
        claimed_dim: example2.as_ref().and_then(|c| c.claimed_dim),
        example2,
        analytic_verdict,
        scans,
        epsilon: margin,
        delta: margin,
        alpha: alpha_bound(spec),
        beta: beta_constant(spec),
    })
}
