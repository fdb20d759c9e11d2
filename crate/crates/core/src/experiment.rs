//! Experiment harness behind the `sinr-conn` binary.
//!
//! An [`ExperimentSpec`] names a command, the SINR parameters, a list of
//! sizes and the color range; [`run_with`] executes it and hands finished
//! batches of [`ExperimentRecord`]s to a sink (one batch per size), and
//! [`Emitter`] turns records into CSV or JSON Lines. Everything that varies
//! between runs (timestamps, fits over the whole run) goes into a separate
//! metadata document so that the record output is byte-identical on replay.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::analysis::{
    detect_exponential_sequence, detect_gap_condition_from, fit_scaling, gamma_threshold,
    gamma_threshold_variant, min_colors_exhaustive, min_k_regular, regular_coloring, GammaVariant,
    RegularFamily, ScalingFit,
};
use crate::generators::{
    exact_sqrt, grid_1d, grid_2d, regular_coloring_1d, sample_uniform_1d, RandomSpec,
    ENUMERATION_MAX_NODES, RNG_ID,
};
use crate::model::{Coloring, Dimension, NodeSet, SinrParams};
use crate::sinr::{build_graph, is_strongly_connected, SinrGraph};

pub const TOOL_NAME: &str = "sinr-conn";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// CSV header, in column order.
pub const CSV_COLUMNS: [&str; 10] = [
    "command",
    "n",
    "k",
    "colors",
    "trial",
    "connected",
    "edges",
    "success_fraction",
    "k_min",
    "seed",
];

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Model(#[from] crate::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("output: {0}")]
    Output(String),
}

impl ExperimentError {
    /// Process exit code: 2 for usage errors, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Usage(_) => 2,
            _ => 1,
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, ExperimentError> {
    Err(ExperimentError::Usage(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Regular colorings of the 1D unit grid.
    Grid1d,
    /// Regular k²-colorings of the 2D unit grid (n must be a perfect square).
    Grid2d,
    /// Regular colorings of uniform random points in [0,1], over seeded trials.
    Random1d,
    /// Gap and exponential-sequence detectors on uniform random points.
    Witness,
    /// Exhaustive minimum over all colorings (n ≤ 10).
    Oracle,
    /// First feasible regular k per size, plus power-law and logarithmic fits.
    Scaling,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Grid1d => "grid1d",
            Command::Grid2d => "grid2d",
            Command::Random1d => "random1d",
            Command::Witness => "witness",
            Command::Oracle => "oracle",
            Command::Scaling => "scaling",
        }
    }

    fn is_random(self) -> bool {
        matches!(self, Command::Random1d | Command::Witness | Command::Oracle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub command: Command,
    pub alpha: f64,
    pub beta: f64,
    pub sizes: Vec<usize>,
    /// Evaluate exactly this color parameter.
    pub k: Option<usize>,
    /// Search `1..=k_max` (clipped to what each size admits).
    pub k_max: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Grid dimension for `scaling`.
    pub dim: u8,
    pub epsilon: f64,
    pub h_min: usize,
    /// Fraction of connected trials that counts as success for `random1d`.
    pub success: f64,
    pub format: Format,
    /// Imported node set for `oracle`, used instead of sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<NodeSet>,
    /// Imported coloring for `oracle`, evaluated on `instance`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coloring: Option<Coloring>,
}

impl ExperimentSpec {
    /// Defaults for everything but the command and sizes.
    pub fn new(command: Command, sizes: Vec<usize>) -> Self {
        ExperimentSpec {
            command,
            alpha: 2.0,
            beta: 1.0,
            sizes,
            k: None,
            k_max: None,
            trials: 1,
            seed: 0,
            dim: 1,
            epsilon: 0.1,
            h_min: 3,
            success: 0.95,
            format: Format::Csv,
            instance: None,
            coloring: None,
        }
    }

    pub fn params(&self) -> Result<SinrParams, ExperimentError> {
        SinrParams::new(self.alpha, self.beta).map_err(|e| ExperimentError::Usage(e.to_string()))
    }

    fn scaling_family(&self) -> RegularFamily {
        if self.dim == 2 {
            RegularFamily::Regular2d
        } else {
            RegularFamily::Regular1d
        }
    }

    fn is_2d(&self) -> bool {
        self.command == Command::Grid2d || (self.command == Command::Scaling && self.dim == 2)
    }

    /// Largest color parameter size `n` admits.
    fn k_limit(&self, n: usize) -> usize {
        if self.is_2d() {
            exact_sqrt(n).unwrap_or(0)
        } else {
            n
        }
    }

    /// Sizes to run: the imported instance's size, or the requested list.
    pub fn effective_sizes(&self) -> Vec<usize> {
        match &self.instance {
            Some(nodes) => vec![nodes.len()],
            None => self.sizes.clone(),
        }
    }

    fn trial_count(&self) -> usize {
        if self.instance.is_some() {
            1
        } else {
            self.trials
        }
    }

    /// Check everything that can be checked before running.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.params()?;
        if self.instance.is_some() && self.command != Command::Oracle {
            return usage("--instance applies to the oracle command");
        }
        match (&self.instance, &self.coloring) {
            (None, Some(_)) => return usage("--coloring needs --instance"),
            (Some(nodes), Some(c)) if c.len() != nodes.len() => {
                return usage(format!(
                    "coloring has {} entries but the instance has {} nodes",
                    c.len(),
                    nodes.len()
                ))
            }
            _ => {}
        }
        let sizes = self.effective_sizes();
        if sizes.is_empty() {
            return usage("at least one size (--n) is required");
        }
        if self.k.is_some() && self.k_max.is_some() {
            return usage("--k and --kmax are mutually exclusive");
        }
        if self.k == Some(0) || self.k_max == Some(0) {
            return usage("color parameters start at 1");
        }
        if self.command.is_random() && self.trials == 0 {
            return usage("--trials must be at least 1");
        }
        if !(self.success > 0.0 && self.success <= 1.0) {
            return usage("--success must lie in (0, 1]");
        }
        if !matches!(self.dim, 1 | 2) {
            return usage("--dim must be 1 or 2");
        }
        if self.command == Command::Scaling && self.sizes.len() < 3 {
            return usage("scaling needs at least three sizes");
        }
        for &n in &sizes {
            if n < 2 {
                return usage(format!("size {n} is too small (need at least 2 nodes)"));
            }
            if self.is_2d() && exact_sqrt(n).is_none() {
                return usage(format!("size {n} is not a perfect square"));
            }
            if let Some(k) = self.k {
                if k > self.k_limit(n) {
                    return usage(format!(
                        "k = {k} exceeds the limit {} for n = {n}",
                        self.k_limit(n)
                    ));
                }
            }
        }
        match self.command {
            Command::Grid1d | Command::Grid2d | Command::Random1d => {
                if self.k.is_none() && self.k_max.is_none() {
                    return usage(format!("{} needs --k or --kmax", self.command.name()));
                }
            }
            Command::Witness => {
                if self.k.is_none() {
                    return usage("witness needs --k");
                }
                if !(self.epsilon > 0.0 && self.epsilon < 1.0 / 3.0) {
                    return usage("--epsilon must lie in (0, 1/3)");
                }
                if self.h_min < 2 {
                    return usage("--hmin must be at least 2");
                }
                for &n in &self.sizes {
                    if self.h_min >= usize::BITS as usize || n < 1usize << self.h_min {
                        return usage(format!("n = {n} is smaller than 2^hmin"));
                    }
                }
            }
            Command::Oracle => {
                let searched = if self.coloring.is_some() {
                    &[][..]
                } else {
                    &sizes[..]
                };
                if let Some(&n) = searched.iter().find(|&&n| n > ENUMERATION_MAX_NODES) {
                    return usage(format!(
                        "oracle supports at most {ENUMERATION_MAX_NODES} nodes, got {n}"
                    ));
                }
                if self.k.is_some() {
                    return usage("oracle takes --kmax, not --k");
                }
            }
            Command::Scaling => {
                if self.k.is_some() {
                    return usage("scaling takes --kmax, not --k");
                }
            }
        }
        Ok(())
    }

    /// Color parameters to evaluate for size `n`.
    fn ks(&self, n: usize) -> Vec<usize> {
        match (self.k, self.k_max) {
            (Some(k), _) => vec![k],
            (None, Some(m)) => (1..=m.min(self.k_limit(n))).collect(),
            (None, None) => (1..=self.k_limit(n)).collect(),
        }
    }
}

/// Minimum feasible color parameter for a size: found, or searched without
/// success. Serialized as the number or as `"none"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KMin {
    Found(usize),
    NoneFound,
}

impl From<Option<usize>> for KMin {
    fn from(k: Option<usize>) -> Self {
        k.map_or(KMin::NoneFound, KMin::Found)
    }
}

impl Serialize for KMin {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            KMin::Found(k) => s.serialize_u64(*k as u64),
            KMin::NoneFound => s.serialize_str("none"),
        }
    }
}

impl<'de> Deserialize<'de> for KMin {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(k) => Ok(KMin::Found(k)),
            Raw::Text(t) if t == "none" => Ok(KMin::NoneFound),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("invalid k_min {t:?}"))),
        }
    }
}

/// One evaluated `(n, k, trial)`.
///
/// `success_fraction` is the fraction of trials connected at this `(n, k)`
/// (0 or 1 for deterministic instances). `k_min` is the smallest `k` whose
/// success fraction reaches the threshold, when the run searched a range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub command: Command,
    pub n: usize,
    pub k: usize,
    pub colors: usize,
    pub trial: usize,
    pub connected: bool,
    pub edges: Option<usize>,
    pub success_fraction: f64,
    pub k_min: Option<KMin>,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Value>,
}

/// Results that summarise a whole run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunSummary {
    pub records: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit>,
}

fn graph_detail(graph: &SinrGraph) -> Value {
    json!({ "near_ties": graph.near_ties() })
}

struct Evaluation {
    connected: bool,
    graph: SinrGraph,
}

fn evaluate(
    nodes: &NodeSet,
    coloring: &Coloring,
    params: &SinrParams,
) -> Result<Evaluation, ExperimentError> {
    let graph = build_graph(nodes, coloring, params)?;
    Ok(Evaluation {
        connected: is_strongly_connected(&graph),
        graph,
    })
}

/// Run `spec`, handing each finished batch of records to `sink`.
pub fn run_with<F>(spec: &ExperimentSpec, mut sink: F) -> Result<RunSummary, ExperimentError>
where
    F: FnMut(&[ExperimentRecord]) -> Result<(), ExperimentError>,
{
    spec.validate()?;
    let params = spec.params()?;
    let mut summary = RunSummary::default();
    let mut fit_points = Vec::new();
    for n in spec.effective_sizes() {
        let batch = match spec.command {
            Command::Grid1d => grid_batch(spec, &params, n, RegularFamily::Regular1d)?,
            Command::Grid2d => grid_batch(spec, &params, n, RegularFamily::Regular2d)?,
            Command::Scaling => {
                let batch = grid_batch(spec, &params, n, spec.scaling_family())?;
                if let Some(KMin::Found(k)) = batch.first().and_then(|r| r.k_min) {
                    let colors = if spec.dim == 2 { k * k } else { k };
                    fit_points.push((n as f64, colors as f64));
                }
                batch
            }
            Command::Random1d => random_batch(spec, &params, n)?,
            Command::Witness => witness_batch(spec, &params, n)?,
            Command::Oracle => oracle_batch(spec, &params, n)?,
        };
        summary.records += batch.len();
        sink(&batch)?;
    }
    if spec.command == Command::Scaling {
        summary.fit = fit_scaling(&fit_points).ok();
    }
    Ok(summary)
}

/// Run `spec` and collect every record.
pub fn run(spec: &ExperimentSpec) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let mut out = Vec::new();
    run_with(spec, |batch| {
        out.extend_from_slice(batch);
        Ok(())
    })?;
    Ok(out)
}

fn grid_batch(
    spec: &ExperimentSpec,
    params: &SinrParams,
    n: usize,
    family: RegularFamily,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let nodes = match family {
        RegularFamily::Regular1d => grid_1d(n)?,
        RegularFamily::Regular2d => grid_2d(n)?,
    };
    let colors_of = |k: usize| match family {
        RegularFamily::Regular1d => k,
        RegularFamily::Regular2d => k * k,
    };
    let searching = spec.k.is_none();
    let mut rows = Vec::new();
    let mut k_min = None;
    for k in spec.ks(n) {
        let eval = evaluate(&nodes, &regular_coloring(&nodes, family, k)?, params)?;
        if eval.connected && k_min.is_none() {
            k_min = Some(k);
        }
        rows.push(ExperimentRecord {
            command: spec.command,
            n,
            k,
            colors: colors_of(k),
            trial: 0,
            connected: eval.connected,
            edges: Some(eval.graph.edge_count()),
            success_fraction: if eval.connected { 1.0 } else { 0.0 },
            k_min: None,
            seed: spec.seed,
            detail: Some(graph_detail(&eval.graph)),
        });
        // Scaling only needs the first feasible k.
        if spec.command == Command::Scaling && eval.connected {
            break;
        }
    }
    if searching {
        let k_min = KMin::from(k_min);
        rows.iter_mut().for_each(|r| r.k_min = Some(k_min));
    }
    Ok(rows)
}

fn random_instance(
    spec: &ExperimentSpec,
    n: usize,
    trial: usize,
) -> Result<NodeSet, ExperimentError> {
    Ok(sample_uniform_1d(RandomSpec::new(
        n,
        spec.seed,
        trial as u64,
    ))?)
}

fn random_batch(
    spec: &ExperimentSpec,
    params: &SinrParams,
    n: usize,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let instances = (0..spec.trials)
        .into_par_iter()
        .map(|t| random_instance(spec, n, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    let mut k_min = None;
    for k in spec.ks(n) {
        let coloring = regular_coloring_1d(n, k)?;
        let evals = instances
            .par_iter()
            .map(|nodes| evaluate(nodes, &coloring, params))
            .collect::<Result<Vec<_>, _>>()?;
        let connected = evals.iter().filter(|e| e.connected).count();
        let fraction = connected as f64 / spec.trials as f64;
        if fraction >= spec.success && k_min.is_none() {
            k_min = Some(k);
        }
        rows.extend(evals.iter().enumerate().map(|(trial, e)| ExperimentRecord {
            command: spec.command,
            n,
            k,
            colors: k,
            trial,
            connected: e.connected,
            edges: Some(e.graph.edge_count()),
            success_fraction: fraction,
            k_min: None,
            seed: spec.seed,
            detail: Some(graph_detail(&e.graph)),
        }));
    }
    if spec.k.is_none() {
        let k_min = KMin::from(k_min);
        rows.iter_mut().for_each(|r| r.k_min = Some(k_min));
    }
    Ok(rows)
}

fn witness_batch(
    spec: &ExperimentSpec,
    params: &SinrParams,
    n: usize,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let k = spec.k.expect("validated");
    let coloring = regular_coloring_1d(n, k)?;
    let gamma = gamma_threshold(params, spec.epsilon)?;
    let gamma_stated = gamma_threshold_variant(params, spec.epsilon, GammaVariant::Stated)?;
    let min_ell = 4.0 * k as f64 / (params.beta() * n as f64);
    let rows = (0..spec.trials)
        .into_par_iter()
        .map(|trial| {
            let nodes = random_instance(spec, n, trial)?;
            let eval = evaluate(&nodes, &coloring, params)?;
            let gap = detect_gap_condition_from(&nodes, k, params.beta(), min_ell)?;
            let seq = detect_exponential_sequence(&nodes, spec.epsilon, spec.h_min)?;
            let seq_summary = seq.as_ref().map(|w| {
                let used = used_colors_in(&coloring, &w.indices);
                json!({
                    "a": w.a,
                    "b": w.b,
                    "h": w.h,
                    "first": w.indices[0],
                    "colors_in_range": used,
                    "below_gamma": (used as f64) < gamma * w.h as f64,
                })
            });
            Ok(ExperimentRecord {
                command: spec.command,
                n,
                k,
                colors: k,
                trial,
                connected: eval.connected,
                edges: Some(eval.graph.edge_count()),
                success_fraction: 0.0,
                k_min: None,
                seed: spec.seed,
                detail: Some(json!({
                    "near_ties": eval.graph.near_ties(),
                    "gamma": gamma,
                    "gamma_stated": gamma_stated,
                    "gap": gap,
                    "exp_seq": seq_summary,
                })),
            })
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let fraction = rows.iter().filter(|r| r.connected).count() as f64 / spec.trials as f64;
    Ok(rows
        .into_iter()
        .map(|r| ExperimentRecord {
            success_fraction: fraction,
            ..r
        })
        .collect())
}

fn used_colors_in(coloring: &Coloring, indices: &[usize]) -> usize {
    let mut seen: Vec<u32> = indices.iter().map(|&i| coloring.color(i)).collect();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Smallest connected regular coloring in index order (sorted order on a line).
fn regular_by_index(
    nodes: &NodeSet,
    params: &SinrParams,
    k_max: usize,
) -> Result<(Vec<bool>, Option<usize>), ExperimentError> {
    if nodes.dimension() == Dimension::One {
        let r = min_k_regular(nodes, params, RegularFamily::Regular1d, k_max)?;
        return Ok((r.feasibility.values().copied().collect(), r.k_min));
    }
    let feasible = (1..=k_max)
        .map(|k| Ok(evaluate(nodes, &regular_coloring_1d(nodes.len(), k)?, params)?.connected))
        .collect::<Result<Vec<bool>, ExperimentError>>()?;
    let k_min = feasible.iter().position(|&f| f).map(|i| i + 1);
    Ok((feasible, k_min))
}

fn oracle_instance(
    spec: &ExperimentSpec,
    n: usize,
    trial: usize,
) -> Result<NodeSet, ExperimentError> {
    match &spec.instance {
        Some(nodes) => Ok(nodes.clone()),
        None => random_instance(spec, n, trial),
    }
}

fn oracle_batch(
    spec: &ExperimentSpec,
    params: &SinrParams,
    n: usize,
) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    if let (Some(nodes), Some(coloring)) = (&spec.instance, &spec.coloring) {
        return Ok(vec![explicit_record(spec, params, nodes, coloring)?]);
    }
    let k_max = spec.k_max.unwrap_or(n).min(n);
    let trials = spec.trial_count();
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let nodes = oracle_instance(spec, n, trial)?;
            let exhaustive = min_colors_exhaustive(&nodes, params, k_max)?;
            let regular = regular_by_index(&nodes, params, k_max)?;
            Ok((trial, exhaustive, regular))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    let mut rows = Vec::new();
    for k in 1..=k_max {
        let fraction = per_trial
            .iter()
            .filter(|(_, e, _)| e.feasibility[&k])
            .count() as f64
            / trials as f64;
        for (trial, exhaustive, (regular, regular_k_min)) in &per_trial {
            rows.push(ExperimentRecord {
                command: spec.command,
                n,
                k,
                colors: k,
                trial: *trial,
                connected: exhaustive.feasibility[&k],
                edges: None,
                success_fraction: fraction,
                k_min: Some(exhaustive.k_min.into()),
                seed: spec.seed,
                detail: Some(json!({
                    "regular_connected": regular[k - 1],
                    "regular_k_min": regular_k_min,
                })),
            });
        }
    }
    Ok(rows)
}

/// One record for an imported coloring, with the exhaustive minimum when the
/// instance is small enough to enumerate.
fn explicit_record(
    spec: &ExperimentSpec,
    params: &SinrParams,
    nodes: &NodeSet,
    coloring: &Coloring,
) -> Result<ExperimentRecord, ExperimentError> {
    let n = nodes.len();
    let eval = evaluate(nodes, coloring, params)?;
    let k_min = if n <= ENUMERATION_MAX_NODES {
        Some(min_colors_exhaustive(nodes, params, n)?.k_min.into())
    } else {
        None
    };
    Ok(ExperimentRecord {
        command: spec.command,
        n,
        k: coloring.k(),
        colors: coloring.used_colors(),
        trial: 0,
        connected: eval.connected,
        edges: Some(eval.graph.edge_count()),
        success_fraction: if eval.connected { 1.0 } else { 0.0 },
        k_min,
        seed: spec.seed,
        detail: Some(graph_detail(&eval.graph)),
    })
}

/// Streaming writer for records; the single writer of the output.
pub struct Emitter<W: Write> {
    format: Format,
    csv: Option<csv::Writer<W>>,
    json: Option<W>,
}

impl<W: Write> Emitter<W> {
    /// Start the output; for CSV this writes the header line.
    pub fn new(out: W, format: Format) -> Result<Self, ExperimentError> {
        match format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new()
                    .has_headers(false)
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(out);
                w.write_record(CSV_COLUMNS).map_err(csv_error)?;
                Ok(Emitter {
                    format,
                    csv: Some(w),
                    json: None,
                })
            }
            Format::Json => Ok(Emitter {
                format,
                csv: None,
                json: Some(out),
            }),
        }
    }

    pub fn write(&mut self, records: &[ExperimentRecord]) -> Result<(), ExperimentError> {
        match self.format {
            Format::Csv => {
                let w = self.csv.as_mut().expect("csv writer");
                for r in records {
                    w.serialize(CsvRow::from(r)).map_err(csv_error)?;
                }
                w.flush()?;
            }
            Format::Json => {
                let w = self.json.as_mut().expect("json writer");
                for r in records {
                    serde_json::to_writer(&mut *w, r)
                        .map_err(|e| ExperimentError::Output(e.to_string()))?;
                    w.write_all(b"\n")?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    pub fn finish(self) -> Result<W, ExperimentError> {
        match (self.csv, self.json) {
            (Some(w), _) => w
                .into_inner()
                .map_err(|e| ExperimentError::Io(e.into_error())),
            (_, Some(w)) => Ok(w),
            _ => unreachable!(),
        }
    }
}

fn csv_error(e: csv::Error) -> ExperimentError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => ExperimentError::Io(io),
        other => ExperimentError::Output(format!("{other:?}")),
    }
}

#[derive(Serialize)]
struct CsvRow<'a> {
    command: &'a str,
    n: usize,
    k: usize,
    colors: usize,
    trial: usize,
    connected: bool,
    edges: Option<usize>,
    success_fraction: f64,
    k_min: Option<KMin>,
    seed: u64,
}

impl<'a> From<&'a ExperimentRecord> for CsvRow<'a> {
    fn from(r: &'a ExperimentRecord) -> Self {
        CsvRow {
            command: r.command.name(),
            n: r.n,
            k: r.k,
            colors: r.colors,
            trial: r.trial,
            connected: r.connected,
            edges: r.edges,
            success_fraction: r.success_fraction,
            k_min: r.k_min,
            seed: r.seed,
        }
    }
}

/// Serialize records in one go.
pub fn emit(records: &[ExperimentRecord], format: Format) -> Result<Vec<u8>, ExperimentError> {
    let mut e = Emitter::new(Vec::new(), format)?;
    e.write(records)?;
    e.finish()
}

/// Parse JSON Lines output back into records.
pub fn parse_json_lines(bytes: &[u8]) -> Result<Vec<ExperimentRecord>, ExperimentError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ExperimentError::Output(e.to_string()))?;
    text.lines()
        .filter(|l| !l.is_empty())
        .map(|l| serde_json::from_str(l).map_err(|e| ExperimentError::Output(e.to_string())))
        .collect()
}

/// Run metadata: tool, generator, spec and anything computed over the whole
/// run. Kept out of the record stream because it carries a timestamp.
pub fn metadata(spec: &ExperimentSpec, summary: &RunSummary, timestamp: u64) -> Value {
    json!({
        "tool": TOOL_NAME,
        "version": TOOL_VERSION,
        "rng": RNG_ID,
        "timestamp": timestamp,
        "spec": spec,
        "summary": summary,
    })
}
