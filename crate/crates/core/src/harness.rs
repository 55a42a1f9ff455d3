//! Batch experiments over random or file-based instances.
//!
//! Every trial derives its own seed from the master seed and its index.
//! Instance generation and solver sampling draw from disjoint substreams of
//! that seed, so two experiments that differ only in palette rule or sensing
//! mode see identical instances and identical solver randomness (common
//! random numbers).

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::connectivity::{self, chromatic_of, Chromatic, ConnectivityError};
use crate::format::{FormatError, GraphFile};
use crate::graphs::{ConstraintGraph, GraphError, Palette, SensingGraph};
use crate::rng::derive_seed;
use crate::solver::{self, SolverError, SolverParams};
use crate::wireless::{self, AllocationMode, DbmConfig, PathLossModel, Position, WirelessError};

/// Seconds per solver round on the reference hardware.
pub const SECONDS_PER_ROUND: f64 = 10.0;
pub const DEFAULT_QUANTILES: [f64; 7] = [0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99];

const INSTANCE_STREAM: u64 = 0;
const SOLVER_STREAM: u64 = 1;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Wireless(#[from] WirelessError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Connectivity(#[from] ConnectivityError),
}

impl HarnessError {
    /// True for failures reading or writing files.
    pub fn is_io(&self) -> bool {
        matches!(
            self,
            HarnessError::Io { .. }
                | HarnessError::Format(FormatError::Io { .. })
                | HarnessError::Wireless(WirelessError::Io { .. })
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    Dbm(DbmConfig),
    /// A fixed instance; trials differ only in solver randomness.
    File {
        path: PathBuf,
    },
    /// Fixed positions with fresh transmit powers per trial.
    Xyz {
        path: PathBuf,
        model: PathLossModel,
        threshold_dbm: f64,
        powers: Vec<f64>,
        mode: AllocationMode,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PaletteRule {
    ExactChi,
    ChiPlus(usize),
    Fixed(usize),
}

impl PaletteRule {
    fn needs_chi(self) -> bool {
        !matches!(self, PaletteRule::Fixed(_))
    }
}

impl FromStr for PaletteRule {
    type Err = String;

    /// `chi`, `chi+K`, or a plain color count.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "chi" {
            return Ok(PaletteRule::ExactChi);
        }
        if let Some(k) = s.strip_prefix("chi+") {
            return k
                .parse()
                .map(PaletteRule::ChiPlus)
                .map_err(|_| format!("bad palette offset in `{s}`"));
        }
        match s.parse::<usize>() {
            Ok(d) if d >= 1 => Ok(PaletteRule::Fixed(d)),
            _ => Err(format!(
                "palette must be `chi`, `chi+K` or a positive count, got `{s}`"
            )),
        }
    }
}

impl fmt::Display for PaletteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PaletteRule::ExactChi => write!(f, "chi"),
            PaletteRule::ChiPlus(k) => write!(f, "chi+{k}"),
            PaletteRule::Fixed(d) => write!(f, "{d}"),
        }
    }
}

/// Which information sets the solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SensingMode {
    /// The instance's own, possibly asymmetric, sensing graph.
    #[default]
    Restricted,
    /// Every constraint edge sensed in both directions.
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub source: Source,
    pub trials: usize,
    pub max_rounds: u64,
    pub palette_rule: PaletteRule,
    pub a: f64,
    pub b: f64,
    pub master_seed: u64,
    pub sensing: SensingMode,
    pub chromatic_budget: u64,
    pub quantiles: Vec<f64>,
}

impl ExperimentConfig {
    pub fn new(source: Source) -> Self {
        Self {
            source,
            trials: 100,
            max_rounds: solver::DEFAULT_MAX_ROUNDS,
            palette_rule: PaletteRule::ExactChi,
            a: solver::DEFAULT_A,
            b: solver::DEFAULT_B,
            master_seed: 0,
            sensing: SensingMode::Restricted,
            chromatic_budget: connectivity::DEFAULT_NODE_BUDGET,
            quantiles: DEFAULT_QUANTILES.to_vec(),
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.trials == 0 {
            return Err(HarnessError::Config("trials must be at least 1".into()));
        }
        if self.max_rounds == 0 {
            return Err(HarnessError::Config("max_rounds must be at least 1".into()));
        }
        if let Some(q) = self.quantiles.iter().find(|q| !(**q > 0.0 && **q <= 1.0)) {
            return Err(HarnessError::Config(format!("quantile {q} outside (0, 1]")));
        }
        // Surface bad a/b before spawning trials.
        SolverParams::new(self.a, self.b, Palette::new(1)?)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub instance_id: usize,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub chi: Option<usize>,
    pub converged: bool,
    pub rounds: u64,
    pub frac_satisfied: f64,
    pub frac_eligible: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CdfPoint {
    pub quantile: f64,
    pub rounds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub trials: usize,
    pub completed: usize,
    pub chromatic_timeouts: usize,
    pub converged: usize,
    pub convergence_fraction: f64,
    /// Mean over converged trials only; non-converged trials are censored.
    pub mean_rounds_converged: Option<f64>,
    pub mean_seconds_converged: Option<f64>,
    /// Empirical quantiles of rounds among converged trials.
    pub rounds_cdf: Vec<CdfPoint>,
    pub eligible_node_fraction: f64,
    pub colored_node_fraction: f64,
    pub censoring: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<TrialRecord>,
    pub summary: Summary,
}

/// Loaded, reusable part of a source.
enum Prepared<'a> {
    Dbm(&'a DbmConfig),
    File(GraphFile),
    Xyz {
        positions: Vec<Position>,
        model: PathLossModel,
        threshold_dbm: f64,
        powers: &'a [f64],
        mode: AllocationMode,
    },
}

impl<'a> Prepared<'a> {
    fn load(source: &'a Source) -> Result<Self, HarnessError> {
        Ok(match source {
            Source::Dbm(cfg) => Prepared::Dbm(cfg),
            Source::File { path } => Prepared::File(GraphFile::read(path)?),
            Source::Xyz {
                path,
                model,
                threshold_dbm,
                powers,
                mode,
            } => Prepared::Xyz {
                positions: wireless::read_xyz(path)?,
                model: *model,
                threshold_dbm: *threshold_dbm,
                powers,
                mode: *mode,
            },
        })
    }

    fn instance(&self, seed: u64) -> Result<(ConstraintGraph, SensingGraph), HarnessError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(match self {
            Prepared::Dbm(cfg) => {
                let inst = wireless::generate_dbm(cfg, &mut rng)?;
                (inst.graph, inst.sensing)
            }
            Prepared::File(f) => (f.graph.clone(), f.sensing.clone()),
            Prepared::Xyz {
                positions,
                model,
                threshold_dbm,
                powers,
                mode,
            } => {
                let nodes = wireless::assign_powers(positions, powers, *threshold_dbm, &mut rng)?;
                wireless::build_interference_graph(&nodes, *model, *mode)
            }
        })
    }
}

enum TrialOutcome {
    Done(TrialRecord),
    ChromaticTimeout,
}

fn run_trial(
    cfg: &ExperimentConfig,
    prepared: &Prepared<'_>,
    index: usize,
    solve: bool,
) -> Result<TrialOutcome, HarnessError> {
    let trial_seed = derive_seed(cfg.master_seed, index as u64);
    let (graph, restricted) = prepared.instance(derive_seed(trial_seed, INSTANCE_STREAM))?;
    let sensing = match cfg.sensing {
        SensingMode::Restricted => restricted,
        SensingMode::Full => SensingGraph::full(&graph),
    };
    let n = graph.n_vertices();
    let chi = if cfg.palette_rule.needs_chi() {
        match chromatic_of(&graph, cfg.chromatic_budget) {
            Chromatic::Exact { value } => Some(value),
            Chromatic::Unknown { .. } => return Ok(TrialOutcome::ChromaticTimeout),
        }
    } else {
        None
    };
    let d = match cfg.palette_rule {
        PaletteRule::ExactChi => chi.unwrap_or(1),
        PaletteRule::ChiPlus(k) => chi.unwrap_or(1) + k,
        PaletteRule::Fixed(d) => d,
    }
    .max(1);
    let palette = Palette::new(d)?;

    if n == 0 {
        return Ok(TrialOutcome::Done(TrialRecord {
            instance_id: index,
            seed: trial_seed,
            n,
            d,
            chi,
            converged: true,
            rounds: 0,
            frac_satisfied: 1.0,
            frac_eligible: 1.0,
        }));
    }

    let eligible = connectivity::node_eligibility(&graph, &sensing, palette)?;
    let frac_eligible = eligible.iter().filter(|&&e| e).count() as f64 / n as f64;

    let (converged, rounds, frac_satisfied) = if solve {
        let params = SolverParams::new(cfg.a, cfg.b, palette)?;
        let out = solver::run(
            &sensing,
            Some(&graph),
            &params,
            derive_seed(trial_seed, SOLVER_STREAM),
            cfg.max_rounds,
        )?;
        let frac = out.fraction_fully_satisfied().unwrap_or(1.0);
        (out.converged, out.rounds_used, frac)
    } else {
        (false, 0, f64::NAN)
    };

    Ok(TrialOutcome::Done(TrialRecord {
        instance_id: index,
        seed: trial_seed,
        n,
        d,
        chi,
        converged,
        rounds,
        frac_satisfied,
        frac_eligible,
    }))
}

fn run_trials(
    cfg: &ExperimentConfig,
    solve: bool,
) -> Result<(Vec<TrialRecord>, usize), HarnessError> {
    cfg.validate()?;
    let prepared = Prepared::load(&cfg.source)?;
    let outcomes = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, &prepared, i, solve))
        .collect::<Result<Vec<_>, _>>()?;
    let mut records = Vec::with_capacity(outcomes.len());
    let mut timeouts = 0;
    for o in outcomes {
        match o {
            TrialOutcome::Done(r) => records.push(r),
            TrialOutcome::ChromaticTimeout => timeouts += 1,
        }
    }
    Ok((records, timeouts))
}

/// Smallest observed value `r` with empirical CDF `F(r) >= q`.
pub fn empirical_quantile(sorted: &[u64], q: f64) -> Option<u64> {
    if sorted.is_empty() {
        return None;
    }
    let k = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Some(sorted[k - 1])
}

fn pooled(records: &[TrialRecord], frac: impl Fn(&TrialRecord) -> f64) -> f64 {
    let total: usize = records.iter().map(|r| r.n).sum();
    if total == 0 {
        return 1.0;
    }
    records.iter().map(|r| frac(r) * r.n as f64).sum::<f64>() / total as f64
}

pub fn summarize(
    records: &[TrialRecord],
    trials: usize,
    chromatic_timeouts: usize,
    quantiles: &[f64],
) -> Summary {
    let mut rounds: Vec<u64> = records
        .iter()
        .filter(|r| r.converged)
        .map(|r| r.rounds)
        .collect();
    rounds.sort_unstable();
    let converged = rounds.len();
    let mean = (converged > 0).then(|| rounds.iter().sum::<u64>() as f64 / converged as f64);
    let rounds_cdf = quantiles
        .iter()
        .filter_map(|&q| {
            empirical_quantile(&rounds, q).map(|r| CdfPoint {
                quantile: q,
                rounds: r,
            })
        })
        .collect();
    Summary {
        trials,
        completed: records.len(),
        chromatic_timeouts,
        converged,
        convergence_fraction: if records.is_empty() {
            0.0
        } else {
            converged as f64 / records.len() as f64
        },
        mean_rounds_converged: mean,
        mean_seconds_converged: mean.map(|m| m * SECONDS_PER_ROUND),
        rounds_cdf,
        eligible_node_fraction: pooled(records, |r| r.frac_eligible),
        colored_node_fraction: pooled(records, |r| r.frac_satisfied),
        censoring: "mean over converged trials only; non-converged trials counted separately",
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult, HarnessError> {
    let (records, timeouts) = run_trials(cfg, true)?;
    let summary = summarize(&records, cfg.trials, timeouts, &cfg.quantiles);
    Ok(ExperimentResult {
        config: cfg.clone(),
        records,
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    pub thresholds_dbm: Vec<f64>,
    pub instances: usize,
    pub area_side: f64,
    pub power_set: Vec<f64>,
    pub frequency_ghz: f64,
    pub palette_rule: PaletteRule,
    /// Solver runs (and colored fractions) only at this threshold.
    pub colored_threshold_dbm: Option<f64>,
    pub max_rounds: u64,
    pub a: f64,
    pub b: f64,
    pub master_seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            lambdas: (1..=10).map(|k| k as f64 / 10.0).collect(),
            thresholds_dbm: vec![-35.0, -30.0, -25.0, -20.0, -15.0, -10.0, -5.0],
            instances: 200,
            area_side: wireless::DEFAULT_AREA_SIDE_M,
            power_set: wireless::DEFAULT_POWERS_DBM.to_vec(),
            frequency_ghz: wireless::DEFAULT_FREQUENCY_GHZ,
            palette_rule: PaletteRule::ExactChi,
            colored_threshold_dbm: Some(-25.0),
            max_rounds: solver::DEFAULT_MAX_ROUNDS,
            a: solver::DEFAULT_A,
            b: solver::DEFAULT_B,
            master_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub threshold_dbm: f64,
    pub instances: usize,
    pub chromatic_timeouts: usize,
    pub eligible_node_fraction: f64,
    pub colored_node_fraction: Option<f64>,
}

/// Per `(lambda, threshold)` node fractions over fresh DBM instances. The
/// same master seed is used at every grid point.
pub fn connectivity_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, HarnessError> {
    if cfg.lambdas.is_empty() || cfg.thresholds_dbm.is_empty() {
        return Err(HarnessError::Config("sweep grids must be nonempty".into()));
    }
    let mut rows = Vec::new();
    for &lambda in &cfg.lambdas {
        for &threshold in &cfg.thresholds_dbm {
            let dbm = DbmConfig {
                intensity: lambda,
                area_side: cfg.area_side,
                power_set: cfg.power_set.clone(),
                detection_threshold_dbm: threshold,
                frequency_ghz: cfg.frequency_ghz,
            };
            let exp = ExperimentConfig {
                trials: cfg.instances,
                max_rounds: cfg.max_rounds,
                palette_rule: cfg.palette_rule,
                a: cfg.a,
                b: cfg.b,
                master_seed: cfg.master_seed,
                ..ExperimentConfig::new(Source::Dbm(dbm))
            };
            let solve = cfg.colored_threshold_dbm == Some(threshold);
            let (records, timeouts) = run_trials(&exp, solve)?;
            rows.push(SweepRow {
                lambda,
                threshold_dbm: threshold,
                instances: records.len(),
                chromatic_timeouts: timeouts,
                eligible_node_fraction: pooled(&records, |r| r.frac_eligible),
                colored_node_fraction: solve.then(|| pooled(&records, |r| r.frac_satisfied)),
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

pub const CSV_COLUMNS: [&str; 9] = [
    "instance_id",
    "seed",
    "n",
    "d",
    "chi",
    "converged",
    "rounds",
    "frac_satisfied",
    "frac_eligible",
];

/// Version tag carried by JSON output.
pub const JSON_SCHEMA_ID: &str = "cfl-experiment/1";

pub fn render_csv(records: &[TrialRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_COLUMNS).expect("writing to memory");
    for r in records {
        w.write_record([
            r.instance_id.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
            r.d.to_string(),
            r.chi.map(|c| c.to_string()).unwrap_or_default(),
            r.converged.to_string(),
            r.rounds.to_string(),
            r.frac_satisfied.to_string(),
            r.frac_eligible.to_string(),
        ])
        .expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv output is utf-8")
}

#[derive(Serialize)]
struct JsonDocument<'a> {
    schema: &'static str,
    config: &'a ExperimentConfig,
    records: &'a [TrialRecord],
    summary: &'a Summary,
}

pub fn render_json(result: &ExperimentResult) -> String {
    let doc = JsonDocument {
        schema: JSON_SCHEMA_ID,
        config: &result.config,
        records: &result.records,
        summary: &result.summary,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("records serialize");
    s.push('\n');
    s
}

/// Writes the records as CSV, or the whole result as JSON, to `path`.
pub fn emit(
    result: &ExperimentResult,
    format: OutputFormat,
    path: &Path,
) -> Result<(), HarnessError> {
    let body = match format {
        OutputFormat::Csv => render_csv(&result.records),
        OutputFormat::Json => render_json(result),
    };
    let io_err = |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut f = std::fs::File::create(path).map_err(io_err)?;
    f.write_all(body.as_bytes()).map_err(io_err)?;
    Ok(())
}
