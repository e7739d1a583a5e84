//! Subcommands. Each builds its artifacts in memory; nothing here touches the
//! file system, so outputs can be compared byte for byte.

use serde::Serialize;
use serde_json::json;
use weierlab_core::dimension::boxcount::OscillationEnvelope;
use weierlab_core::dimension::pointwise::default_radii as pointwise_radii;
use weierlab_core::dimension::{
    box_count_graph, bowen_solve, correlation_dim, formula_dims, pointwise_dim_mu, BoxCountResult, BowenSolution,
    CorrDimEstimate, DimPrediction, PointwiseDimResult, Regime,
};
use weierlab_core::dimension::corrdim::default_radii;
use weierlab_core::rng::derive_seed;
use weierlab_core::transversality::tsujii::swapped;
use weierlab_core::transversality::{
    beta_and_recursion_check, example_sweep, selfsimilarity_check, selfsimilarity_with_mixture,
    theta_distribution_sample, transversality_report, CorrelationSampling, ExampleFamily, ScanGrid, SweepOptions,
    TransversalityReport,
};
use weierlab_core::weierstrass::truncation_depth;
use weierlab_core::{BernoulliMeasure, Graph, Measure, Plan, System, ThetaField};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Artifacts, Provenance};
use crate::verify;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Eval,
    SampleGraph,
    Bowen,
    Dims,
    Boxdim,
    Theta,
    Transversality,
    Tsujii,
    Sweep,
    Verify,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Eval => "eval",
            Command::SampleGraph => "sample-graph",
            Command::Bowen => "bowen",
            Command::Dims => "dims",
            Command::Boxdim => "boxdim",
            Command::Theta => "theta",
            Command::Transversality => "transversality",
            Command::Tsujii => "tsujii",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
            Command::Report => "report",
        }
    }
}

pub struct Context {
    pub cfg: RunConfig,
    pub spec: System,
    pub measure: Measure,
    pub provenance: Provenance,
}

impl Context {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let spec = cfg.system()?;
        let measure = cfg.measure(&spec)?;
        // where and how results are written does not change them
        let mut hashed = cfg.clone();
        hashed.output = Default::default();
        let provenance = Provenance::new(&hashed.echo(), cfg.compute.seed);
        Ok(Self { cfg, spec, measure, provenance })
    }

    fn plan(&self) -> Result<Plan, CliError> {
        truncation_depth(&self.spec, self.cfg.compute.tol).map_err(CliError::core("weierstrass"))
    }

    fn seed(&self, op: &str) -> u64 {
        derive_seed(self.cfg.compute.seed, op, 0)
    }
}

/// Artifacts of a run, plus a failure that should still let them be written.
pub struct Outcome {
    pub artifacts: Artifacts,
    pub failure: Option<CliError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Analytic {
    pub value: f64,
    pub formula: &'static str,
}

fn analytic(value: f64, formula: &'static str) -> Analytic {
    Analytic { value, formula }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Empirical {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BowenReport {
    pub s_star: Analytic,
    pub residual: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
    pub p_star: Vec<f64>,
}

impl From<&BowenSolution<f64>> for BowenReport {
    fn from(b: &BowenSolution<f64>) -> Self {
        Self {
            s_star: analytic(b.s_star, "pressure-root"),
            residual: b.residual,
            iterations: b.iterations,
            bracket: b.bracket,
            p_star: b.p_star.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionReport {
    pub measure: Vec<f64>,
    pub entropy: Analytic,
    pub log_tau_prime: Analytic,
    pub log_lambda: Analytic,
    pub candidate_high: Analytic,
    pub candidate_low: Analytic,
    pub dim_mu: Analytic,
    pub regime: Regime,
}

impl PredictionReport {
    fn new(measure: &Measure, d: &DimPrediction<f64>) -> Self {
        Self {
            measure: measure.probabilities().to_vec(),
            entropy: analytic(d.entropy, "bernoulli-entropy"),
            log_tau_prime: analytic(d.log_tau_prime, "lyapunov-integral-tau"),
            log_lambda: analytic(d.log_lambda, "lyapunov-integral-lambda"),
            candidate_high: analytic(d.candidate_high, "dimension-high-entropy"),
            candidate_low: analytic(d.candidate_low, "dimension-low-entropy"),
            dim_mu: analytic(d.dim_mu, "dimension-min-candidate"),
            regime: d.regime,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountReport {
    pub slope: Empirical,
    pub raw_slope: Empirical,
    pub window: [f64; 2],
    pub points: usize,
    pub truncation_depth: usize,
    pub envelope_constant: Option<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointwiseReport {
    pub slope: Empirical,
    pub median_slope: f64,
    pub slope_quartiles: (f64, f64),
    pub references: usize,
    pub anchors: usize,
}

impl From<&PointwiseDimResult> for PointwiseReport {
    fn from(p: &PointwiseDimResult) -> Self {
        Self {
            slope: Empirical { value: p.slope, stderr: p.stderr },
            median_slope: p.median_slope,
            slope_quartiles: p.slope_quartiles,
            references: p.references,
            anchors: p.anchors,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrDimReport {
    pub slope: Empirical,
    pub degenerate: bool,
    pub n: usize,
    pub x: f64,
}

impl CorrDimReport {
    fn new(c: &CorrDimEstimate, x: f64) -> Self {
        Self { slope: Empirical { value: c.slope, stderr: c.stderr }, degenerate: c.degenerate, n: c.n, x }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub certified: bool,
    pub basis: Option<&'static str>,
    pub claimed_dim: Option<Analytic>,
}

/// Certified only through the analytic cosine / tau-power conditions.
pub fn verdict(t: Option<&TransversalityReport>) -> Verdict {
    match t.and_then(|t| t.example2.as_ref()) {
        Some(c) if c.certified => Verdict {
            certified: true,
            basis: Some("cosine-tau-power-conditions"),
            claimed_dim: c.claimed_dim.map(|d| analytic(d, "two-minus-theta")),
        },
        _ => Verdict { certified: false, basis: None, claimed_dim: None },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionReport {
    pub bowen: BowenReport,
    pub prediction: PredictionReport,
    pub transversality: Option<TransversalityReport>,
    pub verdict: Verdict,
    pub boxcount: BoxCountReport,
    pub theta_corrdim: Option<CorrDimReport>,
    pub pointwise: PointwiseReport,
}

fn box_count(ctx: &Context) -> Result<(BoxCountResult, BoxCountReport), CliError> {
    let c = &ctx.cfg.compute;
    let plan = ctx.plan()?;
    let sample = Graph::uniform(&ctx.spec, c.graph_points, plan.clone());
    let envelope = if c.envelope {
        let spacing = 1.0 / (c.graph_points - 1) as f64;
        Some(OscillationEnvelope::measure(&ctx.spec, &plan, spacing).map_err(CliError::core("dimension"))?)
    } else {
        None
    };
    let pads = envelope.as_ref().map(|e| e.pads(&ctx.spec, &sample));
    let r = box_count_graph(&sample, c.scales[0], c.scales[1], pads.as_deref()).map_err(CliError::core("dimension"))?;
    let raw = r.raw_slope().map(|f| Empirical { value: f.slope, stderr: f.stderr });
    let report = BoxCountReport {
        slope: Empirical { value: r.slope, stderr: r.stderr },
        raw_slope: raw.unwrap_or(Empirical { value: f64::NAN, stderr: f64::NAN }),
        window: [r.scales[r.window.0], r.scales[r.window.1 - 1]],
        points: c.graph_points,
        truncation_depth: plan.depth,
        envelope_constant: envelope.map(|e| e.constant),
        warnings: r.warnings.clone(),
    };
    Ok((r, report))
}

fn pointwise(ctx: &Context) -> Result<PointwiseDimResult, CliError> {
    let c = &ctx.cfg.compute;
    pointwise_dim_mu(&ctx.spec, &ctx.measure, c.samples, c.anchors, &pointwise_radii(), &ctx.plan()?, ctx.seed("pointwise"))
        .map_err(CliError::core("dimension"))
}

fn scan_grid(ctx: &Context) -> ScanGrid {
    let g = ctx.cfg.compute.scan_grid;
    ScanGrid { xi: g[0], eta: g[1], x: g[2] }
}

fn transversality(ctx: &Context) -> Result<TransversalityReport, CliError> {
    let field = ThetaField::for_tolerance(&ctx.spec, ctx.cfg.compute.tol).map_err(CliError::core("fibres"))?;
    transversality_report(&ctx.spec, scan_grid(ctx), field.depth()).map_err(CliError::core("transversality"))
}

/// A vector with `p_0 != p_1` for the swapped-mixture control: the configured
/// one if it qualifies, otherwise weights proportional to `2^{-i}`.
fn control_measure(measure: &Measure) -> Result<Measure, CliError> {
    let p = measure.probabilities();
    let base = if p[0] != p[1] {
        measure.clone()
    } else {
        let w: Vec<f64> = (0..p.len()).map(|i| (-(i as f64)).exp2()).collect();
        let total: f64 = w.iter().sum();
        BernoulliMeasure::new(w.iter().map(|v| v / total).collect()).map_err(CliError::core("measure"))?
    };
    Ok(base)
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn run(cmd: Command, ctx: &Context) -> Result<Outcome, CliError> {
    let mut a = Artifacts::default();
    let prov = &ctx.provenance;
    let name = cmd.name();
    let c = &ctx.cfg.compute;
    let mut failure = None;
    match cmd {
        Command::Validate => {
            let s = &ctx.spec;
            let plan = ctx.plan()?;
            let l = s.branches();
            a.push_json(
                "validate.json",
                name,
                prov,
                json!({
                    "valid": true,
                    "branches": l,
                    "partition": s.partition(),
                    "lambda": (0..l).map(|i| s.lambda_symbol(i)).collect::<Vec<_>>(),
                    "gamma": (0..l).map(|i| s.gamma_symbol(i)).collect::<Vec<_>>(),
                    "truncation_depth": plan.depth,
                    "tail_bound": plan.tail_bound,
                }),
            );
        }
        Command::Eval => {
            let plan = ctx.plan()?;
            let g = Graph::uniform(&ctx.spec, c.eval_points, plan.clone());
            let (lo, hi) = g.points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), p| (l.min(p.1), h.max(p.1)));
            a.push_json(
                "eval.json",
                name,
                prov,
                json!({"points": g.len(), "truncation_depth": plan.depth, "tail_bound": plan.tail_bound, "w_min": lo, "w_max": hi}),
            );
            a.push_csv("eval.csv", |buf| g.write_csv(buf))?;
        }
        Command::SampleGraph => {
            let plan = ctx.plan()?;
            let depth = 60;
            let xs = ctx.measure.sample_points(&ctx.spec, depth, c.samples, ctx.seed("sample-graph"));
            let g = Graph::at(&ctx.spec, &xs, plan.clone());
            a.push_json(
                "sample-graph.json",
                name,
                prov,
                json!({
                    "points": g.len(),
                    "truncation_depth": plan.depth,
                    "tail_bound": plan.tail_bound,
                    "measure": ctx.measure.probabilities(),
                }),
            );
            a.push_csv("graph.csv", |buf| g.write_csv(buf))?;
        }
        Command::Bowen => {
            let b = bowen_solve(&ctx.spec).map_err(CliError::core("dimension"))?;
            a.push_json("bowen.json", name, prov, BowenReport::from(&b));
        }
        Command::Dims => {
            let d = formula_dims(&ctx.measure, &ctx.spec);
            let p = pointwise(ctx)?;
            a.push_json(
                "dims.json",
                name,
                prov,
                json!({"prediction": PredictionReport::new(&ctx.measure, &d), "pointwise": PointwiseReport::from(&p), "pointwise_detail": p}),
            );
        }
        Command::Boxdim => {
            let (r, report) = box_count(ctx)?;
            a.push_json("boxdim.json", name, prov, &report);
            a.push_csv("boxdim.csv", |buf| r.write_csv(buf))?;
            a.push_csv("boxdim_raw.csv", |buf| {
                use std::io::Write;
                writeln!(buf, "scale,count")?;
                for (e, n) in r.scales.iter().zip(&r.raw_counts) {
                    writeln!(buf, "{},{n}", fmt(*e))?;
                }
                Ok(())
            })?;
        }
        Command::Theta => {
            let x = c.theta_x;
            let samples = theta_distribution_sample(&ctx.spec, &ctx.measure, x, c.samples, c.seed)
                .map_err(CliError::core("transversality"))?;
            let values: Vec<f64> = samples.rows.iter().map(|r| r.2).collect();
            let cd = correlation_dim(&values, &default_radii(&values)).map_err(CliError::core("dimension"))?;
            a.push_json("theta.json", name, prov, json!({"x": x, "samples": values.len(), "corrdim": CorrDimReport::new(&cd, x)}));
            a.push_csv("theta.csv", |buf| samples.write_csv(buf))?;
            a.push_csv("theta_corr.csv", |buf| cd.write_csv(buf))?;
        }
        Command::Transversality => {
            let t = transversality(ctx)?;
            a.push_json("transversality.json", name, prov, &t);
        }
        Command::Tsujii => {
            let t = transversality(ctx)?;
            let pc = BernoulliMeasure::critical(&ctx.spec);
            let sampling = CorrelationSampling { fibres: c.corr_fibres, per_fibre: c.corr_per_fibre };
            let rec = beta_and_recursion_check(&ctx.spec, &pc, t.epsilon, t.delta, c.recursion_levels, sampling, ctx.seed("tsujii"))
                .map_err(CliError::core("transversality"))?;
            let control = control_measure(&ctx.measure)?;
            let swapped_mixture = swapped(&control).map_err(CliError::core("measure"))?;
            let (mut passes, mut control_fails) = (0usize, 0usize);
            let mut distances = Vec::new();
            for k in 0..c.ks_repetitions {
                let seed = derive_seed(c.seed, "selfsimilarity", k as u64);
                let ok = selfsimilarity_check(&ctx.spec, &ctx.measure, c.theta_x, c.samples, seed)
                    .map_err(CliError::core("transversality"))?;
                let bad = selfsimilarity_with_mixture(&ctx.spec, &control, &swapped_mixture, c.theta_x, c.samples, seed)
                    .map_err(CliError::core("transversality"))?;
                passes += ok.passes as usize;
                control_fails += (!bad.passes) as usize;
                distances.push((ok.distance, bad.distance));
            }
            let critical = 1.63 * (2.0 / c.samples as f64).sqrt();
            a.push_json(
                "tsujii.json",
                name,
                prov,
                json!({
                    "recursion": rec,
                    "selfsimilarity": {
                        "x": c.theta_x,
                        "n": c.samples,
                        "critical": critical,
                        "repetitions": c.ks_repetitions,
                        "passes": passes,
                        "control_measure": control.probabilities(),
                        "control_failures": control_fails,
                    },
                }),
            );
            a.push_csv("correlation.csv", |buf| {
                use std::io::Write;
                writeln!(buf, "r,I,stderr")?;
                for ci in &rec.integrals {
                    writeln!(buf, "{},{},{}", fmt(ci.r), fmt(ci.value), fmt(ci.stderr))?;
                }
                Ok(())
            })?;
            a.push_csv("ks.csv", |buf| {
                use std::io::Write;
                writeln!(buf, "repetition,distance,control_distance")?;
                for (k, (d, e)) in distances.iter().enumerate() {
                    writeln!(buf, "{k},{},{}", fmt(*d), fmt(*e))?;
                }
                Ok(())
            })?;
        }
        Command::Sweep => {
            let s = &ctx.cfg.sweep;
            let fam = ExampleFamily::new(s.split, s.gamma, s.g.to_core()).map_err(CliError::core("transversality"))?;
            let opts = SweepOptions {
                graph_points: s.graph_points,
                k0: s.scales[0],
                k1: s.scales[1],
                theta_samples: s.theta_samples,
                tol: c.tol,
                seed: c.seed,
            };
            let table = example_sweep(&fam, &fam.grid(s.points), opts).map_err(CliError::core("transversality"))?;
            let (lo, hi) = fam.admissible();
            a.push_json("sweep.json", name, prov, json!({"rows": table.rows, "admissible": [lo, hi]}));
            a.push_csv("sweep.csv", |buf| table.write_csv(buf))?;
        }
        Command::Verify => {
            let rows = verify::run_all(c.seed);
            let failed = rows.iter().filter(|r| !r.pass).count();
            for r in &rows {
                println!("{} {:<16} {:<48} {}", if r.pass { "PASS" } else { "FAIL" }, r.module, r.name, r.detail);
            }
            a.push_json("verify.json", name, prov, json!({"checks": rows, "passed": rows.len() - failed, "failed": failed}));
            if failed > 0 {
                failure = Some(CliError::Verify { failed, total: rows.len() });
            }
        }
        Command::Report => {
            let b = bowen_solve(&ctx.spec).map_err(CliError::core("dimension"))?;
            let d = formula_dims(&ctx.measure, &ctx.spec);
            let t = if ctx.spec.lambda_is_locally_constant() { Some(transversality(ctx)?) } else { None };
            let (r, boxcount) = box_count(ctx)?;
            let theta_corrdim = if ctx.spec.lambda_is_locally_constant() {
                let v: Vec<f64> = theta_distribution_sample(&ctx.spec, &ctx.measure, c.theta_x, c.samples, c.seed)
                    .map_err(CliError::core("transversality"))?
                    .rows
                    .iter()
                    .map(|r| r.2)
                    .collect();
                let cd = correlation_dim(&v, &default_radii(&v)).map_err(CliError::core("dimension"))?;
                Some(CorrDimReport::new(&cd, c.theta_x))
            } else {
                None
            };
            let p = pointwise(ctx)?;
            let report = DimensionReport {
                bowen: BowenReport::from(&b),
                prediction: PredictionReport::new(&ctx.measure, &d),
                verdict: verdict(t.as_ref()),
                transversality: t,
                boxcount,
                theta_corrdim,
                pointwise: PointwiseReport::from(&p),
            };
            a.push_json("report.json", name, prov, &report);
            a.push_csv("boxdim.csv", |buf| r.write_csv(buf))?;
        }
    }
    Ok(Outcome { artifacts: a, failure })
}
