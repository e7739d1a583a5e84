//! Run configuration: TOML with four sections, every default made explicit on
//! resolution.

use serde::{Deserialize, Serialize};
use weierlab_core::{BernoulliMeasure, DisplacementKind, LambdaKind, Measure, System, Violation};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid system: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidSystem(Vec<Violation>),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemConfig,
    #[serde(default)]
    pub measure: MeasureConfig,
    #[serde(default)]
    pub compute: ComputeConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// `0 = a_0 < ... < a_l = 1`; exclusive with `intervals`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Vec<f64>>,
    /// equal partition into this many intervals
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intervals: Option<usize>,
    pub lambda: LambdaConfig,
    pub g: GConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LambdaConfig {
    TauPower { theta: f64 },
    Constant { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GConfig {
    Cosine,
    Sawtooth,
    PiecewiseLinear { slopes: Vec<f64>, intercepts: Vec<f64> },
}

impl GConfig {
    pub fn to_core(&self) -> DisplacementKind<f64> {
        match self {
            GConfig::Cosine => DisplacementKind::Cosine,
            GConfig::Sawtooth => DisplacementKind::Sawtooth,
            GConfig::PiecewiseLinear { slopes, intercepts } => {
                DisplacementKind::PiecewiseLinear { slopes: slopes.clone(), intercepts: intercepts.clone() }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeasureConfig {
    /// the equilibrium vector `p*` of the Bowen root (the critical vector)
    #[default]
    Equilibrium,
    Critical,
    Bernoulli { p: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ComputeConfig {
    pub seed: u64,
    /// Monte-Carlo sample size
    pub samples: usize,
    /// truncation tolerance for `W`
    pub tol: f64,
    pub graph_points: usize,
    /// box-counting exponents `[k0, k1]`, `eps = 2^-k`
    pub scales: [u32; 2],
    /// pad box-counting columns by the oscillation envelope
    pub envelope: bool,
    /// `[xi, eta, x]` grid sizes of the transversality scan
    pub scan_grid: [usize; 3],
    pub recursion_levels: usize,
    pub corr_fibres: usize,
    pub corr_per_fibre: usize,
    /// base point of the self-similarity check and the slope distribution
    pub theta_x: f64,
    pub ks_repetitions: usize,
    pub anchors: usize,
    pub eval_points: usize,
}

impl Default for ComputeConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 100_000,
            tol: 1e-9,
            graph_points: 4_000_000,
            scales: [4, 14],
            envelope: true,
            scan_grid: [64, 64, 256],
            recursion_levels: 6,
            corr_fibres: 256,
            corr_per_fibre: 2000,
            theta_x: 0.3,
            ks_repetitions: 100,
            anchors: 1000,
            eval_points: 1025,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: String,
    /// subset of `json`, `csv`
    pub formats: Vec<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into(), formats: vec!["json".into(), "csv".into()] }
    }
}

impl OutputConfig {
    pub fn csv(&self) -> bool {
        self.formats.iter().any(|f| f == "csv")
    }

    pub fn json(&self) -> bool {
        self.formats.iter().any(|f| f == "json")
    }
}

/// Two-branch piecewise-linear family swept over `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub split: f64,
    pub gamma: [f64; 2],
    pub g: GConfig,
    pub points: usize,
    pub graph_points: usize,
    pub scales: [u32; 2],
    pub theta_samples: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            split: 0.5,
            gamma: [0.6, 0.6],
            g: GConfig::Sawtooth,
            points: 8,
            graph_points: 1 << 20,
            scales: [4, 16],
            theta_samples: 100_000,
        }
    }
}

impl RunConfig {
    /// The system, validated.
    pub fn system(&self) -> Result<System, ConfigError> {
        let partition = match (&self.system.partition, self.system.intervals) {
            (Some(p), None) => p.clone(),
            (None, Some(l)) if l >= 1 => System::equal_partition(l),
            (None, Some(_)) => return Err(ConfigError::Invalid("system.intervals must be positive".into())),
            _ => return Err(ConfigError::Invalid("exactly one of system.partition and system.intervals is required".into())),
        };
        let lambda = match &self.system.lambda {
            LambdaConfig::TauPower { theta } => LambdaKind::TauPower { theta: *theta },
            LambdaConfig::Constant { values } => LambdaKind::ConstantPerInterval(values.clone()),
        };
        let mut spec = System::new(partition, lambda, self.system.g.to_core());
        if let Some(t) = self.system.scale_t {
            spec = spec.with_scale(t);
        }
        let v = spec.validate();
        if !v.is_empty() {
            return Err(ConfigError::InvalidSystem(v));
        }
        Ok(spec)
    }

    pub fn measure(&self, spec: &System) -> Result<Measure, ConfigError> {
        match &self.measure {
            MeasureConfig::Equilibrium | MeasureConfig::Critical => Ok(BernoulliMeasure::critical(spec)),
            MeasureConfig::Bernoulli { p } => {
                if p.len() != spec.branches() {
                    return Err(ConfigError::Invalid(format!(
                        "measure.p has {} entries for {} intervals",
                        p.len(),
                        spec.branches()
                    )));
                }
                BernoulliMeasure::new(p.clone()).map_err(|e| ConfigError::Invalid(e.to_string()))
            }
        }
    }

    fn check(&self) -> Result<(), ConfigError> {
        let c = &self.compute;
        if !(c.tol > 0.0) {
            return Err(ConfigError::Invalid("compute.tol must be positive".into()));
        }
        if c.scales[0] >= c.scales[1] {
            return Err(ConfigError::Invalid("compute.scales must satisfy k0 < k1".into()));
        }
        if c.samples < 2 || c.graph_points < 2 {
            return Err(ConfigError::Invalid("compute.samples and compute.graph_points must be at least 2".into()));
        }
        if !(0.0..=1.0).contains(&c.theta_x) {
            return Err(ConfigError::Invalid("compute.theta_x must lie in [0, 1]".into()));
        }
        if let Some(f) = self.output.formats.iter().find(|f| *f != "json" && *f != "csv") {
            return Err(ConfigError::Invalid(format!("unknown output format {f:?}")));
        }
        Ok(())
    }

    /// Materializes the partition so the echo is self-contained.
    fn resolve(mut self) -> Result<Self, ConfigError> {
        let spec = self.system()?;
        self.system.partition = Some(spec.partition().to_vec());
        self.system.intervals = None;
        self.measure(&spec)?;
        self.check()?;
        Ok(self)
    }

    /// TOML echo of the resolved config.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Parses and resolves a config. Unknown keys are rejected with their location.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let raw: RunConfig = toml::from_str(text)?;
    raw.resolve()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[system]
intervals = 3
lambda = { kind = "tau-power", theta = 0.2 }
g = { kind = "cosine" }
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.compute.tol, 1e-9);
        assert_eq!(c.compute.samples, 100_000);
        assert_eq!(c.compute.seed, 42);
        assert_eq!(c.measure, MeasureConfig::Equilibrium);
        assert_eq!(c.system.partition.as_ref().unwrap().len(), 4);
        let echo = c.echo();
        assert!(echo.contains("tol = ") && echo.contains("seed = 42"), "{echo}");
        assert_eq!(parse_config(&echo).unwrap().compute.tol, 1e-9);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(parse_config(&c.echo()).unwrap(), c);
        let b = parse_config(
            r#"
[system]
partition = [0.0, 0.4, 1.0]
lambda = { kind = "constant", values = [0.7, 0.8] }
g = { kind = "piecewise-linear", slopes = [1.0, -1.0], intercepts = [0.0, 1.0] }
[measure]
kind = "bernoulli"
p = [0.25, 0.75]
[output]
formats = ["json"]
"#,
        )
        .unwrap();
        assert_eq!(parse_config(&b.echo()).unwrap(), b);
    }

    #[test]
    fn slow_weights_fail_validation() {
        let e = parse_config(
            r#"
[system]
intervals = 3
lambda = { kind = "constant", values = [0.3, 0.3, 0.3] }
g = { kind = "cosine" }
"#,
        )
        .unwrap_err();
        assert!(matches!(e, ConfigError::InvalidSystem(_)), "{e}");
    }

    #[test]
    fn unknown_keys_are_located() {
        let e = parse_config(&format!("{MINIMAL}\n[compute]\nseeed = 1\n")).unwrap_err();
        let msg = e.to_string();
        assert!(matches!(e, ConfigError::Parse(_)));
        assert!(msg.contains("seeed") && msg.contains("line"), "{msg}");
        let e = parse_config("[system]\nintervals = 3\nlambda = { kind = \"tau-power\", theta = 0.2, x = 1 }\ng = { kind = \"cosine\" }\n");
        assert!(e.is_err());
    }

    #[test]
    fn partition_and_intervals_are_exclusive() {
        let e = parse_config(
            "[system]\nintervals = 2\npartition = [0.0, 0.5, 1.0]\nlambda = { kind = \"tau-power\", theta = 0.2 }\ng = { kind = \"cosine\" }\n",
        );
        assert!(matches!(e, Err(ConfigError::Invalid(_))));
    }
}
