use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use priorprop::bound::{audit_inequalities, compute_bound, AuditReport, BoundReport, AUDIT_SLACK};
use priorprop::evaluation::{evaluate, pipeline_report, Metrics, PipelineConfig, SyntheticSpec, DEFAULT_EPSILON};
use priorprop::io;
use priorprop::multi_source::{
    alpha_accuracy, alpha_boosting, alpha_constant, alpha_oracle, alpha_probabilistic, estimate_accuracy_from_labeled,
    reduce_to_single_prior, solve_multi_source, ProbabilisticConfig,
};
use priorprop::solver::{solve_soft, solve_with_prior};
use priorprop::spectral::{spectral_bound, FullParams, SpectralReport};
use priorprop::{
    build_threshold_graph, compute_neighborhoods, AlphaScheme, FeatureMatrix, Graph, Label, LabelSet, Prediction,
    PriorField, SolveMethod, SolverConfig, WeakVoteMatrix,
};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "priorprop",
    version,
    about = "Prior-regularized label propagation with weak-labeler fusion and error-bound diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a unit-weight threshold graph from a feature file.
    BuildGraph(BuildGraphArgs),
    /// Solve for node scores and write a prediction file.
    Propagate(PropagateArgs),
    /// Per-hop error bound, inequality audit and spectral bound as JSON.
    Analyze(AnalyzeArgs),
    /// Generate a synthetic instance and compare every method on it.
    Demo(DemoArgs),
}

#[derive(Args)]
struct BuildGraphArgs {
    /// Feature file: one row per node, comma or whitespace separated.
    #[arg(long)]
    features: PathBuf,
    /// Target average degree; the threshold is the (t/N)-quantile of all N² distances.
    #[arg(long)]
    t: f64,
    /// Edge-list file to write.
    #[arg(long, short)]
    output: PathBuf,
}

#[derive(Args)]
struct GraphSource {
    /// Edge-list file (`i j w` per line).
    #[arg(long, conflicts_with = "t")]
    graph: Option<PathBuf>,
    /// Feature file; builds the graph when `--graph` is absent and feeds the
    /// probabilistic alpha scheme.
    #[arg(long)]
    features: Option<PathBuf>,
    /// Target average degree for a graph built from `--features`.
    #[arg(long)]
    t: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Direct,
    Iterative,
}

#[derive(Args)]
struct SolverArgs {
    /// Linear solver for hard-constrained problems.
    #[arg(long, value_enum, default_value = "direct")]
    method: MethodArg,
    /// Residual tolerance of the iterative solver.
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    /// Sweep limit of the iterative solver.
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            method: match self.method {
                MethodArg::Direct => SolveMethod::Direct,
                MethodArg::Iterative => SolveMethod::Iterative,
            },
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            ..SolverConfig::default()
        }
    }
}

#[derive(Args)]
struct PriorArgs {
    /// Prior weight. Without votes the prior value is 0.5 (μ = 0 is plain
    /// propagation); with votes but no alpha scheme the accuracy-weighted vote
    /// average is used with this weight (default 1).
    #[arg(long)]
    mu: Option<f64>,
    /// Weak-vote file: one row per node, entries 0, 1 or -1 (abstain).
    #[arg(long)]
    votes: Option<PathBuf>,
    /// Labeler accuracy file (`j p` per line); estimated from the labeled
    /// nodes when absent.
    #[arg(long)]
    accuracies: Option<PathBuf>,
    /// Fuse votes through dongle nodes with this trust-weight scheme.
    #[arg(long, value_enum)]
    alpha_scheme: Option<SchemeArg>,
    /// Weight used by the constant scheme.
    #[arg(long, default_value_t = 1.0)]
    alpha_constant: f64,
    /// Multiplier for the boosting and probabilistic schemes.
    #[arg(long, default_value_t = 1.0)]
    alpha_scale: f64,
    /// Neighbors used by the probabilistic scheme.
    #[arg(long, default_value_t = 10)]
    k_neighbors: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Oracle,
    Accuracy,
    Boosting,
    Probabilistic,
    Constant,
}

impl From<SchemeArg> for AlphaScheme {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Oracle => AlphaScheme::Oracle,
            SchemeArg::Accuracy => AlphaScheme::Accuracy,
            SchemeArg::Boosting => AlphaScheme::Boosting,
            SchemeArg::Probabilistic => AlphaScheme::Probabilistic,
            SchemeArg::Constant => AlphaScheme::Constant,
        }
    }
}

#[derive(Args)]
struct PropagateArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Label file (`i y` per line).
    #[arg(long)]
    labels: PathBuf,
    #[command(flatten)]
    prior: PriorArgs,
    /// Soft constraints on labeled nodes with this penalty instead of a prior.
    #[arg(long, conflicts_with_all = ["mu", "votes"])]
    eta: Option<f64>,
    #[command(flatten)]
    solver: SolverArgs,
    /// Full ground truth (`i y` per line); enables the metrics output.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Abstention half-width around 0.5.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Prediction file to write (`i f flag` per line).
    #[arg(long, short)]
    output: PathBuf,
    /// Metrics JSON to write; requires `--truth`.
    #[arg(long, requires = "truth")]
    metrics: Option<PathBuf>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long)]
    labels: PathBuf,
    /// Full ground truth; required.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    prior: PriorArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Penalty of the soft-constrained solve behind the spectral bound.
    #[arg(long, default_value_t = 0.1)]
    eta: f64,
    /// Confidence parameter of the spectral bound.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Maximum vertex multiplicity t of the full spectral bound.
    #[arg(long)]
    full_t: Option<f64>,
    /// Bound M on |y| for the full spectral bound.
    #[arg(long, default_value_t = 1.0, requires = "full_t")]
    full_m: f64,
    /// Bound K on |f| for the full spectral bound.
    #[arg(long, default_value_t = 1.0, requires = "full_t")]
    full_k: f64,
    /// Slack of the inequality audit.
    #[arg(long, default_value_t = AUDIT_SLACK)]
    slack: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Report file; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    #[arg(long, default_value_t = 250)]
    points_per_cluster: usize,
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
    /// Labeler accuracies, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.8, 0.8, 0.8])]
    labeler_accuracy: Vec<f64>,
    /// Labeler coverages, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [0.6, 0.6, 0.6])]
    labeler_coverage: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    labeled: usize,
    #[arg(long, default_value_t = 10.0)]
    t: f64,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Full comparison (metrics and bound reports) as JSON.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Lib(priorprop::Error),
}

impl From<priorprop::Error> for CliError {
    fn from(e: priorprop::Error) -> Self {
        CliError::Lib(e)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) if e.is_validation() => 2,
            CliError::Lib(_) => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|source| {
        CliError::Lib(priorprop::Error::Io {
            path: path.to_path_buf(),
            source,
        })
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

struct Inputs {
    graph: Graph,
    features: Option<FeatureMatrix>,
}

fn load_source(source: &GraphSource) -> CliResult<Inputs> {
    let features = source.features.as_deref().map(io::read_features).transpose()?;
    let graph = match (&source.graph, &features, source.t) {
        (Some(path), _, _) => {
            let n = features.as_ref().map(FeatureMatrix::rows);
            io::read_edge_list(path, n)?
        }
        (None, Some(f), Some(t)) => build_threshold_graph(f, t)?,
        (None, Some(_), None) => return Err(usage("--features without --graph needs --t")),
        (None, None, _) => return Err(usage("one of --graph or --features with --t is required")),
    };
    if let Some(f) = &features {
        if f.rows() != graph.node_count() {
            return Err(usage(format!(
                "{} feature rows for a graph with {} nodes",
                f.rows(),
                graph.node_count()
            )));
        }
    }
    Ok(Inputs { graph, features })
}

fn load_votes(path: &Path, n: usize) -> CliResult<WeakVoteMatrix> {
    let votes = io::read_votes(path)?;
    if votes.node_count() != n {
        return Err(usage(format!("{} vote rows for {n} nodes", votes.node_count())));
    }
    Ok(votes)
}

fn check_mu(mu: f64) -> CliResult<f64> {
    if mu.is_finite() && mu >= 0.0 {
        Ok(mu)
    } else {
        Err(usage(format!("--mu must be finite and non-negative, got {mu}")))
    }
}

/// How the unlabeled nodes are regularized.
enum Regularizer {
    Prior(PriorField),
    Dongles {
        votes: WeakVoteMatrix,
        alpha: priorprop::AlphaAssignment,
    },
}

impl Regularizer {
    /// Single prior with the same optimum.
    fn prior(&self) -> CliResult<PriorField> {
        match self {
            Regularizer::Prior(p) => Ok(p.clone()),
            Regularizer::Dongles { votes, alpha } => Ok(reduce_to_single_prior(votes, alpha)?),
        }
    }

    fn solve(&self, inputs: &Inputs, labels: &LabelSet, config: &SolverConfig) -> CliResult<Prediction> {
        Ok(match self {
            Regularizer::Prior(p) => solve_with_prior(&inputs.graph, labels, p, config)?,
            Regularizer::Dongles { votes, alpha } => solve_multi_source(&inputs.graph, labels, votes, alpha, config)?,
        })
    }
}

fn regularizer(
    args: &PriorArgs,
    inputs: &Inputs,
    labels: &LabelSet,
    truth: Option<&[Label]>,
) -> CliResult<Regularizer> {
    let n = inputs.graph.node_count();
    let Some(votes_path) = &args.votes else {
        if args.alpha_scheme.is_some() || args.accuracies.is_some() {
            return Err(usage("--alpha-scheme and --accuracies need --votes"));
        }
        let mu = check_mu(args.mu.unwrap_or(0.0))?;
        return Ok(Regularizer::Prior(PriorField::uniform(n, 0.5, mu)?));
    };
    let votes = load_votes(votes_path, n)?;
    let acc = match &args.accuracies {
        Some(path) => io::read_accuracies(path)?,
        None => estimate_accuracy_from_labeled(&votes, labels)?,
    };
    let Some(scheme) = args.alpha_scheme else {
        let mu = check_mu(args.mu.unwrap_or(1.0))?;
        let weighted = reduce_to_single_prior(&votes, &alpha_accuracy(&votes, &acc)?)?;
        return Ok(Regularizer::Prior(PriorField::new(weighted.h().to_vec(), vec![mu; n])?));
    };
    if args.mu.is_some() {
        return Err(usage("--mu does not apply with --alpha-scheme"));
    }
    let alpha = match AlphaScheme::from(scheme) {
        AlphaScheme::Oracle => {
            let truth = truth.ok_or_else(|| usage("the oracle scheme needs --truth"))?;
            alpha_oracle(&votes, truth)?
        }
        AlphaScheme::Accuracy => alpha_accuracy(&votes, &acc)?,
        AlphaScheme::Boosting => alpha_boosting(&votes, &acc, args.alpha_scale)?,
        AlphaScheme::Probabilistic => {
            let features = inputs
                .features
                .as_ref()
                .ok_or_else(|| usage("the probabilistic scheme needs --features"))?;
            let config = ProbabilisticConfig {
                k_neighbors: args.k_neighbors,
                scale: args.alpha_scale,
                ..ProbabilisticConfig::default()
            };
            alpha_probabilistic(&votes, features, labels, &config)?
        }
        AlphaScheme::Constant => alpha_constant(&votes, args.alpha_constant)?,
    };
    Ok(Regularizer::Dongles { votes, alpha })
}

fn load_labels(path: &Path, n: usize) -> CliResult<LabelSet> {
    let labels = io::read_labels(path)?;
    labels.check_against(n)?;
    Ok(labels)
}

fn build_graph(args: &BuildGraphArgs) -> CliResult<()> {
    let features = io::read_features(&args.features)?;
    let graph = build_threshold_graph(&features, args.t)?;
    io::write_edge_list(&graph, &args.output)?;
    println!(
        "nodes {} edges {} average degree {:.6}",
        graph.node_count(),
        graph.edge_count(),
        graph.average_degree()
    );
    Ok(())
}

fn propagate(args: &PropagateArgs) -> CliResult<()> {
    let inputs = load_source(&args.source)?;
    let n = inputs.graph.node_count();
    let labels = load_labels(&args.labels, n)?;
    let truth = args.truth.as_deref().map(|p| io::read_truth(p, n)).transpose()?;
    let prediction = match args.eta {
        Some(eta) => {
            if args.prior.alpha_scheme.is_some() {
                return Err(usage("--eta cannot be combined with --alpha-scheme"));
            }
            solve_soft(&inputs.graph, &labels, eta)?
        }
        None => {
            let reg = regularizer(&args.prior, &inputs, &labels, truth.as_deref())?;
            reg.solve(&inputs, &labels, &args.solver.config())?
        }
    };
    io::write_prediction(&prediction, &args.output)?;
    let flagged = prediction
        .flags
        .iter()
        .filter(|f| **f != priorprop::NodeFlag::Ok)
        .count();
    println!(
        "solved {} nodes with {} ({} flagged, residual {:.3e})",
        n, prediction.method, flagged, prediction.residual
    );
    if let Some(truth) = &truth {
        let metrics = evaluate(&prediction.values, truth, args.epsilon)?;
        println!(
            "accuracy {:.6} coverage {:.6} non-abstain accuracy {:.6}",
            metrics.accuracy, metrics.coverage, metrics.non_abstain_accuracy
        );
        if let Some(path) = &args.metrics {
            write_text(path, &to_json(&metrics))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveSummary {
    method: String,
    iterations: usize,
    residual: f64,
    converged: bool,
    flagged: usize,
}

#[derive(Serialize)]
struct AnalysisReport {
    node_count: usize,
    edge_count: usize,
    labeled_count: usize,
    solve: SolveSummary,
    metrics: Metrics,
    bound: BoundReport,
    audit: AuditReport,
    spectral: SpectralReport,
}

fn analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let truth_path = args.truth.as_deref().ok_or_else(|| usage("analyze needs --truth"))?;
    let inputs = load_source(&args.source)?;
    let graph = &inputs.graph;
    let n = graph.node_count();
    let labels = load_labels(&args.labels, n)?;
    let truth = io::read_truth(truth_path, n)?;
    if let Some(&(i, y)) = labels.entries().iter().find(|&&(i, y)| truth[i] != y) {
        return Err(usage(format!("label {y} on node {i} disagrees with the truth file")));
    }
    let reg = regularizer(&args.prior, &inputs, &labels, Some(&truth))?;
    let config = args.solver.config();
    let prediction = reg.solve(&inputs, &labels, &config)?;
    let prior = reg.prior()?;
    let partition = compute_neighborhoods(graph, &labels)?;
    let bound = compute_bound(graph, &truth, &prior, &partition, &config)?;
    let audit = audit_inequalities(graph, &truth, &prior, &prediction, &partition, args.slack)?;
    let soft = solve_soft(graph, &labels, args.eta)?;
    let full = args.full_t.map(|t| FullParams {
        t,
        m: args.full_m,
        k: args.full_k,
    });
    let spectral = spectral_bound(graph, &soft.values, &labels, &truth, args.eta, args.delta, full)?;
    let report = AnalysisReport {
        node_count: n,
        edge_count: graph.edge_count(),
        labeled_count: labels.len(),
        solve: SolveSummary {
            method: prediction.method.clone(),
            iterations: prediction.iterations,
            residual: prediction.residual,
            converged: prediction.converged,
            flagged: prediction
                .flags
                .iter()
                .filter(|f| **f != priorprop::NodeFlag::Ok)
                .count(),
        },
        metrics: evaluate(&prediction.values, &truth, args.epsilon)?,
        bound,
        audit,
        spectral,
    };
    let json = to_json(&report);
    match &args.output {
        Some(path) => {
            write_text(path, &json)?;
            println!(
                "hops {} within bound {} audit passed {} lambda1 {:.6e}",
                report.bound.max_hop, report.bound.all_within_bound, report.audit.passed, report.spectral.lambda1
            );
        }
        None => print!("{json}"),
    }
    Ok(())
}

fn demo(args: &DemoArgs) -> CliResult<()> {
    let spec = SyntheticSpec {
        cluster_count: args.clusters,
        points_per_cluster: args.points_per_cluster,
        separation: args.separation,
        dim: args.dim,
        noise: args.noise,
        labeler_accuracies: args.labeler_accuracy.clone(),
        labeler_coverages: args.labeler_coverage.clone(),
        seed: args.seed,
    };
    let config = PipelineConfig {
        labeled_count: args.labeled,
        t: args.t,
        mu: args.mu,
        epsilon: args.epsilon,
        ..PipelineConfig::default()
    };
    let table = pipeline_report(&spec, &config)?;
    print!("{}", table.to_text());
    if let Some(path) = &args.output {
        write_text(path, &to_json(&table))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::BuildGraph(a) => build_graph(a),
        Command::Propagate(a) => propagate(a),
        Command::Analyze(a) => analyze(a),
        Command::Demo(a) => demo(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
