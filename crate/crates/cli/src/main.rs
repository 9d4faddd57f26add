use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rovtrace::classify::Thresholds;
use rovtrace::pipeline::{self, AnalyzeOptions, EnforcingSet, PipelineError, RunManifest};
use rovtrace::propgraph;
use rovtrace::simnet::scenario::BUILTINS;
use rovtrace::simnet::{Scenario, ScenarioError, SimError};
use rovtrace::text::ParseMode;

#[derive(Parser)]
#[command(name = "rovtrace", version, about = "ROV measurement simulation and analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write measurement artifacts plus ground truth.
    Simulate(SimulateArgs),
    /// Classify ASes and build reports from a directory of measurement files.
    Analyze(AnalyzeArgs),
    /// Compare a classification report with a ground-truth policy file.
    Score(ScoreArgs),
    /// Print the metric table for one or more edge-list files.
    GraphMetrics(GraphMetricsArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file (JSON).
    #[arg(long, conflicts_with = "builtin")]
    scenario: Option<PathBuf>,
    /// Built-in scenario name.
    #[arg(long)]
    builtin: Option<String>,
    /// Overrides the scenario and generator seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum EnforcingArg {
    C67,
    C367,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Directory with the measurement files.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Categories removed as enforcing when deriving G2.
    #[arg(long, value_enum, default_value = "c67")]
    enforcing_set: EnforcingArg,
    #[arg(long, default_value_t = 0.10)]
    threshold_paths: f64,
    #[arg(long, default_value_t = 0.10)]
    threshold_routers: f64,
    /// Reject comments, blank lines and malformed records instead of skipping them.
    #[arg(long)]
    strict_parse: bool,
    /// Write only the edge lists and the graph metric table. With a file as
    /// `--in`, read it as an edge list and write only the metric table.
    #[arg(long)]
    graphs_only: bool,
    /// Number of IXPs in the headline ratio.
    #[arg(long, default_value_t = 5)]
    top_ixps: usize,
    /// Skip algebraic connectivity.
    #[arg(long)]
    skip_spectrum: bool,
}

#[derive(Args)]
struct ScoreArgs {
    /// Directory produced by `analyze`.
    #[arg(long)]
    analysis: PathBuf,
    #[arg(long)]
    ground_truth: PathBuf,
    /// Where to write the scorecard; defaults to the analysis directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    strict_parse: bool,
}

#[derive(Args)]
struct GraphMetricsArgs {
    /// Edge-list files; each becomes one column.
    #[arg(required = true)]
    edges: Vec<PathBuf>,
    #[arg(long)]
    skip_spectrum: bool,
    #[arg(long)]
    strict_parse: bool,
}

enum Failure {
    Input(String),
    Invariant(String),
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        if e.is_invariant_violation() {
            Failure::Invariant(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Simulation(SimError::ExportViolation { .. }) => Failure::Invariant(e.to_string()),
            e => Failure::Input(e.to_string()),
        }
    }
}

fn mode(strict: bool) -> ParseMode {
    if strict {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    }
}

fn simulate(args: SimulateArgs) -> Result<(), Failure> {
    let (mut scenario, label) = match (&args.scenario, &args.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            (Scenario::from_json(&text)?, path.display().to_string())
        }
        (None, Some(name)) => (Scenario::builtin(name)?, name.clone()),
        (None, None) => {
            return Err(Failure::Input(format!(
                "give --scenario FILE or --builtin NAME (one of: {})",
                BUILTINS.join(", ")
            )))
        }
    };
    if let Some(seed) = args.seed {
        scenario = scenario.with_seed(seed);
    }
    let (_, artifacts) = scenario.run()?;
    if !artifacts.unreachable.is_empty() {
        eprintln!(
            "warning: topology is disconnected; {} ASes cannot reach the first origin",
            artifacts.unreachable.len()
        );
    }
    let written = pipeline::write_artifacts(&artifacts, &args.out)?;
    fs::write(args.out.join("scenario.json"), scenario.to_json() + "\n")
        .map_err(|e| Failure::Input(format!("{}: {e}", args.out.display())))?;
    let mut manifest = RunManifest::new("simulate", &args.out);
    manifest.scenario = Some(label);
    manifest.seed = Some(scenario.seed);
    manifest.stages = vec!["generate".into(), "converge".into(), "emit".into()];
    manifest.inputs = written.iter().map(|p| file_name(p)).collect();
    manifest.write(&args.out)?;
    println!(
        "wrote {} traceroutes and {} control-plane paths to {}",
        artifacts.traceroutes.len(),
        artifacts.control.len(),
        args.out.display()
    );
    Ok(())
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

fn analyze(args: AnalyzeArgs) -> Result<(), Failure> {
    for (flag, v) in [("--threshold-paths", args.threshold_paths), ("--threshold-routers", args.threshold_routers)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Failure::Input(format!("{flag} must lie in [0, 1], got {v}")));
        }
    }
    if args.graphs_only && args.input.is_file() {
        let (name, m) = edge_list_metrics(&args.input, args.skip_spectrum, mode(args.strict_parse))?;
        fs::create_dir_all(&args.out).map_err(|e| Failure::Input(format!("{}: {e}", args.out.display())))?;
        pipeline::write_file(
            &args.out.join(pipeline::GRAPH_METRICS),
            &propgraph::format_metrics_table(&[(name.as_str(), &m)]),
        )?;
        return Ok(());
    }
    if !args.input.is_dir() {
        return Err(Failure::Input(format!("{} is not a directory", args.input.display())));
    }
    let opts = AnalyzeOptions {
        enforcing: match args.enforcing_set {
            EnforcingArg::C67 => EnforcingSet::C67,
            EnforcingArg::C367 => EnforcingSet::C367,
        },
        thresholds: Thresholds {
            path_frac: args.threshold_paths,
            router_frac: args.threshold_routers,
        },
        mode: mode(args.strict_parse),
        top_ixps: args.top_ixps,
        skip_spectrum: args.skip_spectrum,
    };
    let analysis = pipeline::analyze_dir(&args.input, &opts)?;
    for w in &analysis.inputs.warnings {
        eprintln!("warning: {w}");
    }
    fs::create_dir_all(&args.out).map_err(|e| Failure::Input(format!("{}: {e}", args.out.display())))?;
    let written = if args.graphs_only {
        pipeline::write_graph_reports(&analysis, &args.out)?
    } else {
        pipeline::write_reports(&analysis, &args.out)?
    };
    let mut manifest = RunManifest::new("analyze", &args.out);
    manifest.inputs = vec![args.input.display().to_string()];
    manifest.stages = written.iter().map(|p| file_name(p)).collect();
    manifest.write(&args.out)?;
    if !args.graphs_only {
        print!("{}", pipeline::summary_text(&analysis));
    }
    Ok(())
}

fn score(args: ScoreArgs) -> Result<(), Failure> {
    let card = pipeline::score_dir(&args.analysis, &args.ground_truth, mode(args.strict_parse))?;
    let text = pipeline::format_scorecard(&card);
    let out = args.out.unwrap_or(args.analysis);
    fs::create_dir_all(&out).map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    pipeline::write_file(&out.join(pipeline::SCORECARD), &text)?;
    print!("{text}");
    Ok(())
}

fn edge_list_metrics(path: &Path, skip_spectrum: bool, mode: ParseMode) -> Result<(String, propgraph::GraphMetrics), Failure> {
    let fail = |e: &dyn std::fmt::Display| Failure::Input(format!("{}: {e}", path.display()));
    let text = fs::read_to_string(path).map_err(|e| fail(&e))?;
    let g = propgraph::parse_edge_list(&text, mode).map_err(|e| fail(&e))?;
    let m = if skip_spectrum {
        propgraph::metrics_without_spectrum(&g)
    } else {
        propgraph::metrics(&g)
    }
    .map_err(|e| fail(&e))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok((name, m))
}

fn graph_metrics(args: GraphMetricsArgs) -> Result<(), Failure> {
    let mut columns = Vec::new();
    for path in &args.edges {
        columns.push(edge_list_metrics(path, args.skip_spectrum, mode(args.strict_parse))?);
    }
    let refs: Vec<(&str, &propgraph::GraphMetrics)> = columns.iter().map(|(n, m)| (n.as_str(), m)).collect();
    print!("{}", propgraph::format_metrics_table(&refs));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Analyze(a) => analyze(a),
        Command::Score(a) => score(a),
        Command::GraphMetrics(a) => graph_metrics(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
