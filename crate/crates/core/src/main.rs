use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde::Deserialize;

use sinr_connectivity::experiment::{
    metadata, run_with, Command, Emitter, ExperimentError, ExperimentSpec, Format,
};

/// Uniform-power SINR connectivity experiments.
///
/// Records go to stdout (or --out) as CSV or JSON Lines; the same arguments
/// always produce the same bytes. Run metadata, including a timestamp and
/// the scaling fit, can be written separately with --meta.
#[derive(Debug, Parser)]
#[command(name = "sinr-conn", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,

    /// Path-loss exponent (≥ 1). Default 2.
    #[arg(long)]
    alpha: Option<f64>,
    /// Decoding threshold (≥ 1). Default 1.
    #[arg(long)]
    beta: Option<f64>,
    /// Instance size; repeat for several sizes.
    #[arg(long = "n", num_args = 1)]
    sizes: Vec<usize>,
    /// Evaluate a single color parameter.
    #[arg(long)]
    k: Option<usize>,
    /// Search color parameters 1..=KMAX.
    #[arg(long = "kmax")]
    k_max: Option<usize>,
    /// Random trials per size. Default 1.
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial t uses stream t of this seed. Default 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Grid dimension for `scaling` (1 or 2). Default 1.
    #[arg(long)]
    dim: Option<u8>,
    /// Exponential-sequence tolerance in (0, 1/3). Default 0.1.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Minimum exponential-sequence length. Default 3.
    #[arg(long = "hmin")]
    h_min: Option<usize>,
    /// Connected-trial fraction that counts as success. Default 0.95.
    #[arg(long)]
    success: Option<f64>,
    /// Output format. Default csv.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON node set for `oracle` (as serialized by the library).
    #[arg(long)]
    instance: Option<PathBuf>,
    /// JSON coloring to evaluate on --instance.
    #[arg(long)]
    coloring: Option<PathBuf>,
    /// Write records here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file with defaults for any of the flags above; flags win.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write run metadata (version, generator, timestamp, fits) as JSON.
    #[arg(long)]
    meta: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    alpha: Option<f64>,
    beta: Option<f64>,
    #[serde(alias = "sizes")]
    n: Option<Vec<usize>>,
    k: Option<usize>,
    #[serde(alias = "k_max")]
    kmax: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    dim: Option<u8>,
    epsilon: Option<f64>,
    #[serde(alias = "h_min")]
    hmin: Option<usize>,
    success: Option<f64>,
    format: Option<Format>,
    instance: Option<PathBuf>,
    coloring: Option<PathBuf>,
    out: Option<PathBuf>,
    meta: Option<PathBuf>,
}

fn load_json<T: serde::de::DeserializeOwned>(
    what: &str,
    path: &Path,
) -> Result<T, ExperimentError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        ExperimentError::Usage(format!("cannot read {what} {}: {e}", path.display()))
    })?;
    serde_json::from_str(&text)
        .map_err(|e| ExperimentError::Usage(format!("bad {what} {}: {e}", path.display())))
}

struct Plan {
    spec: ExperimentSpec,
    out: Option<PathBuf>,
    meta: Option<PathBuf>,
}

fn plan(cli: Cli) -> Result<Plan, ExperimentError> {
    let cfg = match &cli.config {
        Some(p) => load_json("config", p)?,
        None => Config::default(),
    };
    let sizes = if cli.sizes.is_empty() {
        cfg.n.unwrap_or_default()
    } else {
        cli.sizes
    };
    let mut spec = ExperimentSpec::new(cli.command, sizes);
    // A k on the command line overrides a kmax from the config and vice versa.
    let (k, k_max) = if cli.k.is_some() || cli.k_max.is_some() {
        (cli.k, cli.k_max)
    } else {
        (cfg.k, cfg.kmax)
    };
    spec.k = k;
    spec.k_max = k_max;
    macro_rules! merge {
        ($field:ident, $flag:ident, $key:ident) => {
            if let Some(v) = cli.$flag.or(cfg.$key) {
                spec.$field = v;
            }
        };
    }
    merge!(alpha, alpha, alpha);
    merge!(beta, beta, beta);
    merge!(trials, trials, trials);
    merge!(seed, seed, seed);
    merge!(dim, dim, dim);
    merge!(epsilon, epsilon, epsilon);
    merge!(h_min, h_min, hmin);
    merge!(success, success, success);
    merge!(format, format, format);
    if let Some(path) = cli.instance.or(cfg.instance) {
        spec.instance = Some(load_json("instance", &path)?);
    }
    if let Some(path) = cli.coloring.or(cfg.coloring) {
        spec.coloring = Some(load_json("coloring", &path)?);
    }
    spec.validate()?;
    Ok(Plan {
        spec,
        out: cli.out.or(cfg.out),
        meta: cli.meta.or(cfg.meta),
    })
}

fn execute(plan: Plan) -> Result<(), ExperimentError> {
    let sink: Box<dyn Write> = match &plan.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(io::stdout().lock()),
    };
    let mut emitter = Emitter::new(sink, plan.spec.format)?;
    let summary = run_with(&plan.spec, |batch| emitter.write(batch))?;
    emitter.finish()?.flush()?;

    if let Some(fit) = &summary.fit {
        eprintln!(
            "power law: exponent {:.4} ± {:.4}, residual norm {:.4}; logarithmic: {:.4} ln n + {:.4}, residual norm {:.4}",
            fit.power_law.exponent,
            fit.power_law.exponent_stderr,
            fit.power_law.residual_norm(),
            fit.logarithmic.coefficient,
            fit.logarithmic.intercept,
            fit.logarithmic.residual_norm(),
        );
    }
    if let Some(path) = &plan.meta {
        let now = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let doc = metadata(&plan.spec, &summary, now);
        let mut f = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut f, &doc)
            .map_err(|e| ExperimentError::Output(e.to_string()))?;
        f.write_all(b"\n")?;
        f.flush()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match plan(cli).and_then(execute) {
        Ok(()) => ExitCode::SUCCESS,
        // Downstream closed the pipe (e.g. `| head`); nothing left to report.
        Err(ExperimentError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sinr-conn: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
