//! `cfl`: generate, analyze, and solve coloring instances with asymmetric
//! sensing, and run batch experiments.
//!
//! Exit codes: 0 success, 2 configuration error, 3 I/O error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use cfl_core::bounds::{self, BoundInputs};
use cfl_core::connectivity::{self, Chromatic};
use cfl_core::harness::{
    self, ExperimentConfig, HarnessError, OutputFormat, PaletteRule, SensingMode, Source,
    SweepConfig,
};
use cfl_core::solver::{self, SolverParams};
use cfl_core::wireless::{self, AllocationMode, DbmConfig, Node, PathLossModel};
use cfl_core::{ConstraintGraph, GraphFile, Palette, SensingGraph};

#[derive(Parser)]
#[command(
    name = "cfl",
    version,
    about = "Communication-free learning graph coloring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a directed Boolean model instance.
    Generate(GenerateArgs),
    /// Build an interference graph from an x y z coordinate file.
    Ingest(IngestArgs),
    /// Report sensing-graph structure and convergence conditions as JSON.
    Analyze(AnalyzeArgs),
    /// Run the solver once on a graph file and print the outcome as JSON.
    Solve(SolveArgs),
    /// Run a batch of trials.
    Experiment(ExperimentArgs),
    /// Node eligibility and colored fractions over a (lambda, threshold) grid.
    Sweep(SweepArgs),
    /// Worst-case convergence-time bounds.
    Bounds(BoundsArgs),
}

#[derive(Args)]
struct RadioArgs {
    /// Transmit power set in dBm, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = wireless::DEFAULT_POWERS_DBM)]
    powers: Vec<f64>,
    #[arg(long, allow_hyphen_values = true)]
    threshold_dbm: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    lambda: f64,
    #[arg(long, default_value_t = wireless::DEFAULT_AREA_SIDE_M)]
    area_side: f64,
    #[arg(long, default_value_t = wireless::DEFAULT_FREQUENCY_GHZ)]
    freq_ghz: f64,
    #[command(flatten)]
    radio: RadioArgs,
    /// Palette written to the header: `chi`, `chi+K`, or a count.
    #[arg(long, default_value = "chi")]
    palette: PaletteRule,
    /// Graph file to write; node positions go to `<out>.nodes.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Channel,
    Tdma,
}

impl From<ModeArg> for AllocationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Channel => AllocationMode::Channel,
            ModeArg::Tdma => AllocationMode::Tdma,
        }
    }
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    xyz: PathBuf,
    /// Path-loss exponent.
    #[arg(long, default_value_t = wireless::DEFAULT_EXPONENT)]
    alpha: f64,
    #[command(flatten)]
    radio: RadioArgs,
    #[arg(long, value_enum, default_value = "channel")]
    mode: ModeArg,
    #[arg(long, default_value = "chi")]
    palette: PaletteRule,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    graph: PathBuf,
    /// Override the palette size from the file header.
    #[arg(long)]
    colors: Option<usize>,
    #[arg(long, default_value_t = connectivity::DEFAULT_NODE_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = solver::DEFAULT_A)]
    a: f64,
    #[arg(long, default_value_t = solver::DEFAULT_B)]
    b: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = solver::DEFAULT_MAX_ROUNDS)]
    max_rounds: u64,
}

#[derive(Args)]
struct SolveArgs {
    graph: PathBuf,
    #[arg(long)]
    colors: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Print colors 1-based.
    #[arg(long)]
    one_based: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Dbm,
    File,
    Xyz,
}

#[derive(Clone, Copy, ValueEnum)]
enum SensingArg {
    Restricted,
    Full,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum, default_value = "dbm")]
    source: SourceArg,
    /// Graph file (file source) or coordinate file (xyz source).
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 0.5)]
    lambda: f64,
    #[arg(long, default_value_t = wireless::DEFAULT_AREA_SIDE_M)]
    area_side: f64,
    #[arg(long, default_value_t = wireless::DEFAULT_FREQUENCY_GHZ)]
    freq_ghz: f64,
    #[arg(long, default_value_t = wireless::DEFAULT_EXPONENT)]
    alpha: f64,
    #[arg(long, default_value_t = -25.0, allow_hyphen_values = true)]
    threshold_dbm: f64,
    #[arg(long, value_delimiter = ',', default_values_t = wireless::DEFAULT_POWERS_DBM)]
    powers: Vec<f64>,
    #[arg(long, value_enum, default_value = "channel")]
    mode: ModeArg,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = solver::DEFAULT_MAX_ROUNDS)]
    max_rounds: u64,
    #[arg(long, default_value = "chi")]
    palette: PaletteRule,
    #[arg(long, default_value_t = solver::DEFAULT_A)]
    a: f64,
    #[arg(long, default_value_t = solver::DEFAULT_B)]
    b: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "restricted")]
    sensing: SensingArg,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])]
    lambdas: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_values_t = [-35.0, -30.0, -25.0, -20.0, -15.0, -10.0, -5.0])]
    thresholds: Vec<f64>,
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Threshold at which solver runs measure the colored fraction.
    #[arg(long, allow_hyphen_values = true)]
    colored_at: Option<f64>,
    #[arg(long, default_value = "chi")]
    palette: PaletteRule,
    #[arg(long, default_value_t = solver::DEFAULT_MAX_ROUNDS)]
    max_rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    n: u64,
    #[arg(long, conflicts_with_all = ["a", "b", "d"])]
    gamma: Option<f64>,
    #[arg(long, default_value_t = bounds::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    /// Palette size, used with --a/--b to derive gamma.
    #[arg(long)]
    d: Option<usize>,
}

enum CliError {
    Config(String),
    Io(String),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

fn config<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn read_graph(path: &Path) -> Result<GraphFile, CliError> {
    GraphFile::read(path).map_err(|e| CliError::from(HarnessError::from(e)))
}

fn write_output(out: Option<&Path>, body: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, body).map_err(io_err(path)),
        None => std::io::stdout()
            .write_all(body.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}

fn palette_for(g: &ConstraintGraph, rule: PaletteRule) -> Result<Palette, CliError> {
    let d = match rule {
        PaletteRule::Fixed(d) => d,
        PaletteRule::ExactChi | PaletteRule::ChiPlus(_) => {
            let chi = match connectivity::chromatic_of(g, connectivity::DEFAULT_NODE_BUDGET) {
                Chromatic::Exact { value } => value,
                Chromatic::Unknown { lower, upper } => {
                    return Err(CliError::Config(format!(
                        "chromatic number unresolved within budget ({lower}..={upper}); pass an explicit --palette"
                    )))
                }
            };
            let extra = if let PaletteRule::ChiPlus(k) = rule {
                k
            } else {
                0
            };
            chi + extra
        }
    };
    Palette::new(d.max(1)).map_err(config)
}

#[derive(Serialize)]
struct NodesSidecar<'a> {
    nodes: &'a [Node],
    model: PathLossModel,
    seed: u64,
}

fn write_instance(
    out: &Path,
    graph: ConstraintGraph,
    sensing: SensingGraph,
    nodes: &[Node],
    model: PathLossModel,
    seed: u64,
    rule: PaletteRule,
) -> Result<(), CliError> {
    let palette = palette_for(&graph, rule)?;
    let file = GraphFile {
        graph,
        sensing,
        palette,
    };
    let mut text = format!("# seed {seed}, {} nodes\n", nodes.len());
    text.push_str(&file.render());
    std::fs::write(out, text).map_err(io_err(out))?;
    let mut sidecar = out.as_os_str().to_owned();
    sidecar.push(".nodes.json");
    let sidecar = PathBuf::from(sidecar);
    let body = to_json(&NodesSidecar { nodes, model, seed });
    std::fs::write(&sidecar, body).map_err(io_err(&sidecar))
}

fn generate(args: GenerateArgs) -> Result<(), CliError> {
    let cfg = DbmConfig {
        intensity: args.lambda,
        area_side: args.area_side,
        power_set: args.radio.powers,
        detection_threshold_dbm: args.radio.threshold_dbm,
        frequency_ghz: args.freq_ghz,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.radio.seed);
    let inst = wireless::generate_dbm(&cfg, &mut rng).map_err(config)?;
    let model = PathLossModel::three_gpp(args.freq_ghz).map_err(config)?;
    write_instance(
        &args.out,
        inst.graph,
        inst.sensing,
        &inst.nodes,
        model,
        args.radio.seed,
        args.palette,
    )
}

fn ingest(args: IngestArgs) -> Result<(), CliError> {
    let model = PathLossModel::exponent(args.alpha).map_err(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.radio.seed);
    let nodes = wireless::ingest_xyz(
        &args.xyz,
        &args.radio.powers,
        args.radio.threshold_dbm,
        &mut rng,
    )
    .map_err(|e| CliError::from(HarnessError::from(e)))?;
    let (graph, sensing) = wireless::build_interference_graph(&nodes, model, args.mode.into());
    write_instance(
        &args.out,
        graph,
        sensing,
        &nodes,
        model,
        args.radio.seed,
        args.palette,
    )
}

fn analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let f = read_graph(&args.graph)?;
    let palette = match args.colors {
        Some(d) => Palette::new(d).map_err(config)?,
        None => f.palette,
    };
    let report = connectivity::analyze_with_budget(&f.graph, &f.sensing, palette, args.budget)
        .map_err(config)?;
    write_output(None, &to_json(&report))
}

#[derive(Serialize)]
struct SolveReport {
    converged: bool,
    rounds_used: u64,
    final_assignment: Vec<usize>,
    per_vertex_full_satisfaction: Option<Vec<bool>>,
    proper_coloring: bool,
    n_colors: usize,
    seed: u64,
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let f = read_graph(&args.graph)?;
    let palette = match args.colors {
        Some(d) => Palette::new(d).map_err(config)?,
        None => f.palette,
    };
    let params = SolverParams::new(args.solver.a, args.solver.b, palette).map_err(config)?;
    let out = solver::run(
        &f.sensing,
        Some(&f.graph),
        &params,
        args.solver.seed,
        args.solver.max_rounds,
    )
    .map_err(config)?;
    let offset = usize::from(args.one_based);
    let proper =
        cfl_core::graphs::is_proper_coloring(&f.graph, &out.final_assignment).map_err(config)?;
    let report = SolveReport {
        converged: out.converged,
        rounds_used: out.rounds_used,
        final_assignment: out
            .final_assignment
            .colors()
            .iter()
            .map(|c| c + offset)
            .collect(),
        per_vertex_full_satisfaction: out.per_vertex_full_satisfaction,
        proper_coloring: proper,
        n_colors: palette.n_colors(),
        seed: args.solver.seed,
    };
    write_output(None, &to_json(&report))
}

fn experiment(args: ExperimentArgs) -> Result<(), CliError> {
    let need_input = || {
        args.input
            .clone()
            .ok_or_else(|| CliError::Config("--input is required for this source".into()))
    };
    let source = match args.source {
        SourceArg::Dbm => Source::Dbm(DbmConfig {
            intensity: args.lambda,
            area_side: args.area_side,
            power_set: args.powers.clone(),
            detection_threshold_dbm: args.threshold_dbm,
            frequency_ghz: args.freq_ghz,
        }),
        SourceArg::File => Source::File {
            path: need_input()?,
        },
        SourceArg::Xyz => Source::Xyz {
            path: need_input()?,
            model: PathLossModel::exponent(args.alpha).map_err(config)?,
            threshold_dbm: args.threshold_dbm,
            powers: args.powers.clone(),
            mode: args.mode.into(),
        },
    };
    let cfg = ExperimentConfig {
        trials: args.trials,
        max_rounds: args.max_rounds,
        palette_rule: args.palette,
        a: args.a,
        b: args.b,
        master_seed: args.seed,
        sensing: match args.sensing {
            SensingArg::Restricted => SensingMode::Restricted,
            SensingArg::Full => SensingMode::Full,
        },
        ..ExperimentConfig::new(source)
    };
    let result = harness::run_experiment(&cfg)?;
    match &args.out {
        Some(path) => harness::emit(&result, args.format, path)?,
        None => {
            let body = match args.format {
                OutputFormat::Csv => harness::render_csv(&result.records),
                OutputFormat::Json => harness::render_json(&result),
            };
            write_output(None, &body)?;
        }
    }
    eprintln!(
        "{}",
        serde_json::to_string(&result.summary).expect("summary serializes")
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), CliError> {
    let cfg = SweepConfig {
        lambdas: args.lambdas,
        thresholds_dbm: args.thresholds,
        instances: args.instances,
        palette_rule: args.palette,
        colored_threshold_dbm: args.colored_at,
        max_rounds: args.max_rounds,
        master_seed: args.seed,
        ..SweepConfig::default()
    };
    let rows = harness::connectivity_sweep(&cfg)?;
    write_output(args.out.as_deref(), &to_json(&rows))
}

#[derive(Serialize)]
struct BoundsReport {
    inputs: BoundInputs,
    theorem1: bounds::Bound,
    corollary2: bounds::Bound,
}

fn bounds_cmd(args: BoundsArgs) -> Result<(), CliError> {
    let gamma = match (args.gamma, args.a, args.b, args.d) {
        (Some(g), None, None, None) => g,
        (None, a, b, Some(d)) => {
            let palette = Palette::new(d).map_err(config)?;
            SolverParams::new(
                a.unwrap_or(solver::DEFAULT_A),
                b.unwrap_or(solver::DEFAULT_B),
                palette,
            )
            .map_err(config)?
            .gamma()
        }
        _ => {
            return Err(CliError::Config(
                "pass --gamma, or --d with optional --a/--b".into(),
            ))
        }
    };
    let inputs = BoundInputs::new(args.n, gamma, args.epsilon).map_err(config)?;
    let report = BoundsReport {
        inputs,
        theorem1: bounds::theorem1_bound(&inputs),
        corollary2: bounds::corollary2_bound(&inputs),
    };
    write_output(None, &to_json(&report))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Ingest(a) => ingest(a),
        Command::Analyze(a) => analyze(a),
        Command::Solve(a) => solve(a),
        Command::Experiment(a) => experiment(a),
        Command::Sweep(a) => sweep(a),
        Command::Bounds(a) => bounds_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
