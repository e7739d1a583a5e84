use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weierlab::commands::{run, Command, Context};
use weierlab::config::parse_config;
use weierlab::error::CliError;

/// Numerical laboratory for Weierstrass-type graphs.
#[derive(Parser)]
#[command(name = "weierlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration
    #[arg(long, global = true, env = "WEIERLAB_CONFIG")]
    config: Option<PathBuf>,
    /// output directory, overrides output.dir
    #[arg(long, global = true, env = "WEIERLAB_OUT")]
    out: Option<PathBuf>,
    #[arg(long, global = true, env = "WEIERLAB_SEED")]
    seed: Option<u64>,
    /// worker threads; results do not depend on it
    #[arg(long, global = true, env = "WEIERLAB_THREADS")]
    threads: Option<usize>,
    /// box-counting exponents as K0..K1
    #[arg(long, global = true, env = "WEIERLAB_SCALES", value_parser = parse_scales)]
    scales: Option<[u32; 2]>,
    #[arg(long, global = true, env = "WEIERLAB_SAMPLES")]
    samples: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Check the system and print its derived constants
    Validate,
    /// Evaluate W on an equispaced grid
    Eval,
    /// Sample graph points under the configured measure
    SampleGraph,
    /// Solve the Bowen equation
    Bowen,
    /// Predicted and Monte-Carlo measure dimensions
    Dims,
    /// Box-counting dimension of the graph
    Boxdim,
    /// Distribution of the strong-stable slope and its correlation dimension
    Theta,
    /// Analytic transversality conditions and the margin scan
    Transversality,
    /// Correlation-integral recursion and self-similarity tests
    Tsujii,
    /// Dimension sweep over the two-branch example family
    Sweep,
    /// Run the invariant suite
    Verify,
    /// Bundled dimension report
    Report,
}

impl From<Sub> for Command {
    fn from(s: Sub) -> Self {
        match s {
            Sub::Validate => Command::Validate,
            Sub::Eval => Command::Eval,
            Sub::SampleGraph => Command::SampleGraph,
            Sub::Bowen => Command::Bowen,
            Sub::Dims => Command::Dims,
            Sub::Boxdim => Command::Boxdim,
            Sub::Theta => Command::Theta,
            Sub::Transversality => Command::Transversality,
            Sub::Tsujii => Command::Tsujii,
            Sub::Sweep => Command::Sweep,
            Sub::Verify => Command::Verify,
            Sub::Report => Command::Report,
        }
    }
}

fn parse_scales(s: &str) -> Result<[u32; 2], String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected K0..K1, got {s:?}"))?;
    let k0 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let k1 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok([k0, k1])
}

/// Built-in config used when `--config` is absent: the tau-power cosine system.
const DEFAULT_CONFIG: &str = r#"
[system]
intervals = 3
lambda = { kind = "tau-power", theta = 0.2 }
g = { kind = "cosine" }
"#;

fn execute(cli: Cli) -> Result<(), CliError> {
    let c = cli.common;
    let text = match &c.config {
        Some(p) => std::fs::read_to_string(p)?,
        None => DEFAULT_CONFIG.to_string(),
    };
    let mut cfg = parse_config(&text)?;
    if let Some(s) = c.seed {
        cfg.compute.seed = s;
    }
    if let Some(s) = c.scales {
        cfg.compute.scales = s;
    }
    if let Some(n) = c.samples {
        cfg.compute.samples = n;
    }
    if let Some(o) = &c.out {
        cfg.output.dir = o.to_string_lossy().into_owned();
    }
    // overrides go through the same validation as the file
    let cfg = parse_config(&cfg.echo())?;
    if let Some(t) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let dir = PathBuf::from(&cfg.output.dir);
    let (json, csv) = (cfg.output.json(), cfg.output.csv());
    let echo = cfg.echo();
    let ctx = Context::new(cfg)?;
    let outcome = run(cli.command.into(), &ctx)?;
    outcome.artifacts.write(&dir, json, csv)?;
    std::fs::write(dir.join("config.resolved.toml"), echo)?;
    for (name, _) in outcome.artifacts.files(json, csv) {
        println!("wrote {}", dir.join(name).display());
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
