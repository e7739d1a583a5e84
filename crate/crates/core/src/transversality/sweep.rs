//! Sweep of `t -> W_{tau, t lambda}` over the two-branch piecewise-linear family
//! with `lambda_i = |I_i| / gamma_i` and `g' = a_i` on `I_i`.
//!
//! For this family the slope field does not depend on `x`:
//! `Theta_t(xi) = -sum_n t^{-n} gamma^n(xi) a_{w_n}`.

use std::io::{self, Write};

use serde::Serialize;

use crate::dimension::boxcount::{box_count_graph, OscillationEnvelope};
use crate::dimension::pressure::bowen_solve;
use crate::error::{Error, Result};
use crate::measure::BernoulliMeasure;
use crate::rng::derive_seed;
use crate::system::{DisplacementKind, LambdaKind, SystemSpec};
use crate::transversality::tsujii::theta_distribution_dim;
use crate::weierstrass::{truncation_depth, GraphSample};

#[derive(Debug, Clone, PartialEq)]
pub struct ExampleFamily {
    partition: Vec<f64>,
    gamma: [f64; 2],
    g: DisplacementKind<f64>,
}

impl ExampleFamily {
    /// `split` is the common endpoint of `I_0` and `I_1`; `g` is piecewise
    /// linear on the two intervals, or the sawtooth `dist(x, Z)` with
    /// `split = 1/2`.
    pub fn new(split: f64, gamma: [f64; 2], g: DisplacementKind<f64>) -> Result<Self> {
        if !(split > 0.0 && split < 1.0) {
            return Err(Error::Domain(format!("split point must lie in (0, 1), got {split}")));
        }
        if gamma.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return Err(Error::Domain(format!("gamma must lie in (0, 1), got {gamma:?}")));
        }
        let slopes = match &g {
            DisplacementKind::PiecewiseLinear { slopes, intercepts } if slopes.len() == 2 && intercepts.len() == 2 => {
                [slopes[0], slopes[1]]
            }
            DisplacementKind::Sawtooth if split == 0.5 => [1.0, -1.0],
            _ => return Err(Error::Unsupported("family needs g linear on each of the two intervals".into())),
        };
        if gamma[0] * slopes[0] == gamma[1] * slopes[1] {
            return Err(Error::Domain("family needs gamma_0 a_0 != gamma_1 a_1".into()));
        }
        let fam = Self { partition: vec![0.0, split, 1.0], gamma, g };
        let (lo, hi) = fam.admissible();
        if !(lo < hi) {
            return Err(Error::Domain(format!("admissible interval ({lo}, {hi}] is empty")));
        }
        Ok(fam)
    }

    /// The Takagi case: equal halves, equal `gamma`, `g = dist(x, Z)`.
    pub fn takagi(gamma: f64) -> Result<Self> {
        Self::new(0.5, [gamma, gamma], DisplacementKind::Sawtooth)
    }

    fn width(&self, i: usize) -> f64 {
        self.partition[i + 1] - self.partition[i]
    }

    /// `(max gamma_i, min gamma_i / sqrt|I_i|)`: open on the left, closed on the right.
    pub fn admissible(&self) -> (f64, f64) {
        let lo = self.gamma[0].max(self.gamma[1]);
        let hi = (self.gamma[0] / self.width(0).sqrt()).min(self.gamma[1] / self.width(1).sqrt());
        (lo, hi)
    }

    /// `(tau, t lambda, g)`; rejects `t` outside the admissible interval.
    pub fn system(&self, t: f64) -> Result<SystemSpec<f64>> {
        let (lo, hi) = self.admissible();
        if !(t > lo) {
            return Err(Error::OutsideAdmissible { t, endpoint: format!("t > max gamma_i = {lo}") });
        }
        if !(t <= hi) {
            return Err(Error::OutsideAdmissible { t, endpoint: format!("t <= min gamma_i / sqrt|I_i| = {hi}") });
        }
        let lambda = (0..2).map(|i| self.width(i) / self.gamma[i]).collect();
        SystemSpec::new(self.partition.clone(), LambdaKind::ConstantPerInterval(lambda), self.g.clone())
            .with_scale(t)
            .into_valid()
    }

    /// `count` values of `t` evenly spaced in the admissible interval, ending at
    /// its right endpoint.
    pub fn grid(&self, count: usize) -> Vec<f64> {
        let (lo, hi) = self.admissible();
        (1..=count).map(|k| lo + (hi - lo) * k as f64 / count as f64).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepOptions {
    pub graph_points: usize,
    pub k0: u32,
    pub k1: u32,
    pub theta_samples: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { graph_points: 1 << 20, k0: 4, k1: 16, theta_samples: 100_000, tol: 1e-9, seed: 42 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub s_bowen: f64,
    pub boxdim: f64,
    pub boxdim_err: f64,
    /// correlation dimension of `Theta_t` under the equilibrium measure
    pub corrdim: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    /// CSV with header `t,s_bowen,boxdim,boxdim_err,corrdim`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,s_bowen,boxdim,boxdim_err,corrdim")?;
        for r in &self.rows {
            writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", r.t, r.s_bowen, r.boxdim, r.boxdim_err, r.corrdim)?;
        }
        Ok(())
    }
}

/// Bowen root, padded box-counting slope and the correlation dimension of
/// `Theta_t` for each `t`. Nothing is claimed about the exceptional set.
pub fn example_sweep(family: &ExampleFamily, ts: &[f64], opts: SweepOptions) -> Result<SweepTable> {
    let mut rows = Vec::with_capacity(ts.len());
    for (k, &t) in ts.iter().enumerate() {
        let spec = family.system(t)?;
        let bowen = bowen_solve(&spec)?;
        let plan = truncation_depth(&spec, opts.tol)?;
        let sample = GraphSample::uniform(&spec, opts.graph_points, plan.clone());
        let env = OscillationEnvelope::measure(&spec, &plan, 1.0 / (opts.graph_points.max(2) - 1) as f64)?;
        let pads = env.pads(&spec, &sample);
        let bc = box_count_graph(&sample, opts.k0, opts.k1, Some(&pads))?;
        let eq = BernoulliMeasure::new(bowen.p_star.clone())?;
        let cd = theta_distribution_dim(&spec, &eq, 0.5, opts.theta_samples, derive_seed(opts.seed, "sweep", k as u64))?;
        rows.push(SweepRow { t, s_bowen: bowen.s_star, boxdim: bc.slope, boxdim_err: bc.stderr, corrdim: cd.slope });
    }
    Ok(SweepTable { rows })
}
