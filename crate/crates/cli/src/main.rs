use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rtlr::bench::{
    evaluate_result, exact_gain, run_query, run_sweep_on, Pipeline, RunOptions, SweepConfig, CSV_HEADER,
};
use rtlr::graph::partition_snapshots;
use rtlr::predictor::{candidate_edges, predict_next_snapshot};
use rtlr::query::theta_bound;
use rtlr::synth::{preferential_attachment, write_temporal_edges, PaConfig};
use rtlr::{Edge, Error};

#[derive(Parser)]
#[command(name = "rtlr", version, about = "Reconnecting top-l relationships queries over temporal graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Answer one query for an explicit group.
    Query(QueryArgs),
    /// Run sampled queries over lists of group sizes and budgets, emitting CSV.
    Sweep(SweepArgs),
    /// Estimate the spread gain of reconnecting given edges.
    Evaluate(EvaluateArgs),
    /// Write the predicted next snapshot as a `src dst` edge list.
    Predict(PredictArgs),
    /// Print the sketch count from the sample-size bound.
    ThetaBound(ThetaBoundArgs),
    /// Write a synthetic temporal edge list (preferential attachment).
    Generate(GenerateArgs),
}

/// Settings shared by every command that builds a pipeline. Each one can also
/// come from a `key = value` config file; flags win.
#[derive(Args)]
struct PipelineArgs {
    /// Flat `key = value` file with any of the long flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Temporal edge list: `src dst ts` per line.
    #[arg(long)]
    dataset: Option<String>,
    /// Number of snapshots T.
    #[arg(long)]
    snapshots: Option<String>,
    /// Number of sketches.
    #[arg(long)]
    theta: Option<String>,
    /// persistence | union:<k> | threshold:<tau>
    #[arg(long)]
    predictor: Option<String>,
    /// Use this edge list as the predicted snapshot instead of a predictor.
    #[arg(long)]
    gt_file: Option<String>,
    #[arg(long)]
    seed: Option<String>,
}

impl PipelineArgs {
    fn config(&self, extra: &[(&str, &Option<String>)]) -> Result<SweepConfig, Error> {
        let mut cfg = match &self.config {
            Some(path) => SweepConfig::from_kv_str(&fs::read_to_string(path)?)?,
            None => SweepConfig::default(),
        };
        let own = [
            ("dataset", &self.dataset),
            ("snapshots", &self.snapshots),
            ("theta", &self.theta),
            ("predictor", &self.predictor),
            ("gt-file", &self.gt_file),
            ("seed", &self.seed),
        ];
        for (key, value) in own.iter().chain(extra) {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct QueryArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Comma-separated vertex labels.
    #[arg(long)]
    group: String,
    /// Budget; a comma-separated list runs one query per value.
    #[arg(long)]
    l: Option<String>,
    /// sbg | ce-sbg | o-sbg | all, or a comma-separated list.
    #[arg(long)]
    algorithm: Option<String>,
    /// Monte Carlo trials for the `mc_gain` column (0 leaves it empty).
    #[arg(long)]
    eval_trials: Option<String>,
    /// Fill the `runtime_ms` column.
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    l: Option<String>,
    /// Comma-separated group sizes.
    #[arg(long)]
    group_size: Option<String>,
    /// Queries per group size.
    #[arg(long)]
    queries: Option<String>,
    #[arg(long)]
    algorithm: Option<String>,
    #[arg(long)]
    eval_trials: Option<String>,
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    group: String,
    /// Edges to reconnect, `u->v` joined by `;` or `,`.
    #[arg(long, default_value = "")]
    edges: String,
    #[arg(long, default_value_t = 10_000)]
    eval_trials: u64,
    /// Also compute the exact gain by enumerating live-edge worlds.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThetaBoundArgs {
    /// Vertex count; alternatively read it from `--dataset`.
    #[arg(long)]
    vertices: Option<u64>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    l: u64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 10_000)]
    vertices: usize,
    #[arg(long, default_value_t = 3)]
    edges_per_vertex: usize,
    #[arg(long, default_value_t = 1_000)]
    horizon: i64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn labels(list: &str) -> Vec<&str> {
    list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect()
}

fn query(args: QueryArgs) -> Result<(), Error> {
    let timing = args.timing.then(|| "true".to_string());
    let cfg = args.pipeline.config(&[
        ("l", &args.l),
        ("algorithm", &args.algorithm),
        ("eval-trials", &args.eval_trials),
        ("timing", &timing),
    ])?;
    let mut p = Pipeline::from_config(&cfg)?;
    let group = p.resolve_group(&labels(&args.group))?;
    if group.is_empty() {
        return Err(Error::Argument("--group is empty".into()));
    }
    let opts = RunOptions { eval_trials: cfg.eval_trials, seed: cfg.seed, timing: cfg.timing };
    let mut out = output(&args.out)?;
    writeln!(out, "{CSV_HEADER}")?;
    for (i, &l) in cfg.l_values.iter().enumerate() {
        for row in run_query(&mut p, i, &group, l, &cfg.algorithms, opts)? {
            writeln!(out, "{}", row.to_csv())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let timing = args.timing.then(|| "true".to_string());
    let cfg = args.pipeline.config(&[
        ("l", &args.l),
        ("group-size", &args.group_size),
        ("queries", &args.queries),
        ("algorithm", &args.algorithm),
        ("eval-trials", &args.eval_trials),
        ("timing", &timing),
    ])?;
    let mut p = Pipeline::from_config(&cfg)?;
    run_sweep_on(&mut p, &cfg, output(&args.out)?)?;
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let cfg = args.pipeline.config(&[])?;
    let p = Pipeline::from_config(&cfg)?;
    let group = p.resolve_group(&labels(&args.group))?;
    let mut edges = Vec::new();
    for item in args.edges.split([';', ',']).map(str::trim).filter(|s| !s.is_empty()) {
        let (a, b) = item
            .split_once("->")
            .ok_or_else(|| Error::Argument(format!("expected `u->v`, got {item:?}")))?;
        edges.push(Edge { src: p.graph.resolve(a.trim())?, dst: p.graph.resolve(b.trim())? });
    }
    let mc = evaluate_result(&p.gt, &group, &edges, args.eval_trials, cfg.seed)?;
    let mut out = io::stdout().lock();
    writeln!(out, "mc_gain={} stderr={} trials={}", mc.mean, mc.stderr, mc.trials)?;
    if args.exact {
        writeln!(out, "exact_gain={}", exact_gain(&p.gt, &group, &edges)?)?;
    }
    Ok(())
}

fn predict(args: PredictArgs) -> Result<(), Error> {
    let cfg = args.pipeline.config(&[])?;
    let path = cfg.dataset.as_deref().ok_or_else(|| Error::Argument("--dataset is required".into()))?;
    let g = rtlr::bench::load_graph(path, cfg.snapshots)?;
    let gt = predict_next_snapshot(&g, cfg.predictor)?;
    let ce = candidate_edges(&g, &gt)?;
    let mut out = output(&args.out)?;
    writeln!(out, "# predictor={} vertices={} edges={} candidates={}", cfg.predictor, g.num_vertices(), gt.num_edges(), ce.len())?;
    for e in gt.edges() {
        writeln!(out, "{} {}", g.label(e.src), g.label(e.dst))?;
    }
    out.flush()?;
    Ok(())
}

fn theta_bound_cmd(args: ThetaBoundArgs) -> Result<(), Error> {
    let n = match (args.vertices, &args.dataset) {
        (Some(n), _) => n,
        (None, Some(path)) => {
            let list = rtlr::graph::load_temporal_edges(io::BufReader::new(File::open(path)?))?;
            partition_snapshots(&list, 1)?.num_vertices() as u64
        }
        (None, None) => return Err(Error::Argument("give --vertices or --dataset".into())),
    };
    let bound = theta_bound(n, args.l, args.epsilon)?;
    println!("vertices={n} l={} epsilon={} theta={bound} theta_ceil={}", args.l, args.epsilon, bound.ceil());
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<(), Error> {
    let cfg = PaConfig {
        num_vertices: args.vertices,
        edges_per_vertex: args.edges_per_vertex,
        horizon: args.horizon,
        seed: args.seed,
        ..PaConfig::default()
    };
    let list = preferential_attachment(&cfg)?;
    let mut out = output(&args.out)?;
    write_temporal_edges(&list, &mut out)?;
    out.flush()?;
    Ok(())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::Parse { .. } | Error::Empty | Error::Format(_) => 2,
        Error::Capacity { .. } => 3,
        _ => 1,
    }
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
        Command::Query(a) => query(a),
        Command::Sweep(a) => sweep(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Predict(a) => predict(a),
        Command::ThetaBound(a) => theta_bound_cmd(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("rtlr: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
