//! Command-line interface. Results go to stdout or files, logs to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gbsk_core::dataset::generate_synthetic;
use gbsk_core::metrics::scores;
use gbsk_core::pipeline::{default_alpha, default_budget, Variant};
use gbsk_core::{run_gbsk, BallBudget, ClusteringResult, Dataset, GbskParams, SyntheticSpec};

use crate::bench::{run_bench, write_outputs, BenchPlan};
use crate::dump::{skeleton_svg, write_balls_csv, write_peaks_csv, write_skeleton_csv};
use crate::io::{load_dataset, read_labels, write_binary, write_csv, write_labels, write_labels_to, Format};
use crate::report::{MetricsReport, RunReport};

#[derive(Debug, Parser)]
#[command(name = "gbsk", version, about = "Granular-ball skeleton clustering")]
pub struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "GBSK_THREADS")]
    pub threads: Option<usize>,
    /// More log output on stderr (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster with explicit parameters; omitted ones use the preset defaults.
    Cluster(ClusterArgs),
    /// Cluster with the preset s = 30, alpha = 1/sqrt(n), M = 10k.
    Agbsk(AgbskArgs),
    /// Generate a Gaussian-blob dataset.
    Gen(GenArgs),
    /// Score predicted labels against ground truth (JSON on stdout).
    Eval(EvalArgs),
    /// Run a benchmark plan.
    Bench(BenchArgs),
    /// Cluster, then dump key balls and the skeleton forest.
    DumpSkeleton(DumpArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Normalize {
    Minmax,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input dataset (CSV or raw binary).
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Input format; guessed from the extension when absent (.bin/.gbsk = bin).
    #[arg(long, value_parser = ["csv", "bin"])]
    pub format: Option<String>,
    /// The last CSV column holds ground-truth labels.
    #[arg(long)]
    pub has_labels: bool,
    /// Ground-truth labels file, one integer per line.
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    /// Rescale every feature to [0, 1] before clustering.
    #[arg(long, value_enum)]
    pub normalize: Option<Normalize>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Labels file (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// JSON run report.
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    /// Number of sample sets [default: 30].
    #[arg(long)]
    pub s: Option<usize>,
    /// Sampling proportion in (0, 1] [default: 1/sqrt(n)].
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Ball budget per sample, -1 for unlimited [default: 10k].
    #[arg(long, allow_negative_numbers = true)]
    pub m: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "standard", value_parser = ["standard", "no-sampling", "no-representative-balls"])]
    pub variant: String,
}

impl ParamArgs {
    pub fn resolve(&self, n: usize) -> Result<GbskParams> {
        Ok(GbskParams {
            s: self.s.unwrap_or(30),
            alpha: self.alpha.unwrap_or_else(|| default_alpha(n)),
            budget: match self.m {
                Some(m) => BallBudget::from_signed(m)?,
                None => default_budget(self.k),
            },
            k: self.k,
            master_seed: self.seed,
            variant: self.variant.parse::<Variant>()?,
        })
    }
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AgbskArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Number of clusters.
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub clusters: usize,
    #[arg(long)]
    pub per_cluster: usize,
    #[arg(long)]
    pub dim: usize,
    /// Grid spacing of the cluster centers.
    #[arg(long, default_value_t = 10.0)]
    pub spread: f64,
    /// Per-axis standard deviation inside each cluster.
    #[arg(long, default_value_t = 1.0)]
    pub std: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; CSV files get a trailing label column.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    #[arg(long, value_parser = ["csv", "bin"])]
    pub format: Option<String>,
    /// Also write the ground-truth labels here.
    #[arg(long, value_name = "PATH")]
    pub labels_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "PATH")]
    pub pred: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON bench plan.
    #[arg(long, value_name = "PATH")]
    pub plan: PathBuf,
    /// Directory for results.csv, summary.csv and summary.json.
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Skeleton edge list CSV (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub edges: Option<PathBuf>,
    /// Key-ball CSV.
    #[arg(long, value_name = "PATH")]
    pub balls: Option<PathBuf>,
    /// Density, delta and gamma per key ball, CSV.
    #[arg(long, value_name = "PATH")]
    pub peaks: Option<PathBuf>,
    /// SVG drawing of the skeleton (1 to 3 dimensions).
    #[arg(long, value_name = "PATH")]
    pub svg: Option<PathBuf>,
    /// Draw the data points under the skeleton.
    #[arg(long)]
    pub with_points: bool,
}

fn format_of(path: &Path, explicit: &Option<String>) -> Result<Format> {
    match explicit {
        Some(f) => f.parse().map_err(anyhow::Error::msg),
        None => Ok(Format::from_path(path)),
    }
}

fn load(input: &InputArgs) -> Result<(Dataset, Option<Vec<i64>>)> {
    let format = format_of(&input.input, &input.format)?;
    let mut ds = load_dataset(&input.input, format, input.has_labels)?;
    if input.normalize == Some(Normalize::Minmax) {
        ds.normalize_min_max();
    }
    let truth = match &input.truth {
        Some(p) => Some(read_labels(p)?),
        None => ds.labels().map(<[i64]>::to_vec),
    };
    if let Some(t) = &truth {
        if t.len() != ds.n() {
            bail!("{} truth labels for {} points", t.len(), ds.n());
        }
    }
    log::info!("loaded {} points, d = {}", ds.n(), ds.d());
    Ok((ds, truth))
}

fn run_and_report(ds: &Dataset, truth: Option<&[i64]>, params: &GbskParams, output: &OutputArgs) -> Result<ClusteringResult> {
    log::info!(
        "s = {}, alpha = {}, M = {}, k = {}, seed = {}, variant = {}",
        params.s,
        params.alpha,
        params.budget.as_signed(),
        params.k,
        params.master_seed,
        params.variant.name()
    );
    let result = run_gbsk(ds, params)?;
    let total = result.timings.total().as_secs_f64();
    log::info!(
        "W = {} key balls, {} pooled centers, {:.3} s",
        result.diagnostics.key_ball_count,
        result.diagnostics.rep_ball_count,
        total
    );
    let sc = truth.map(|t| scores(&result.labels, t)).transpose()?;
    if let Some(sc) = sc {
        eprintln!("ACC {:.4}  ARI {:.4}  AMI {:.4}", sc.acc, sc.ari, sc.ami);
    }
    match &output.out {
        Some(path) => write_labels(path, &result.labels)?,
        None => {
            let stdout = io::stdout();
            let mut w = BufWriter::new(stdout.lock());
            write_labels_to(&mut w, &result.labels)?;
            w.flush()?;
        }
    }
    if let Some(path) = &output.report {
        let report = RunReport::new(ds.n(), ds.d(), params, &result, sc);
        std::fs::write(path, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(result)
}

fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let (ds, truth) = load(&args.input)?;
    let params = args.params.resolve(ds.n())?;
    run_and_report(&ds, truth.as_deref(), &params, &args.output).map(drop)
}

fn cmd_agbsk(args: &AgbskArgs) -> Result<()> {
    let (ds, truth) = load(&args.input)?;
    let params = gbsk_core::agbsk_params(ds.n(), args.k, args.seed);
    run_and_report(&ds, truth.as_deref(), &params, &args.output).map(drop)
}

fn cmd_gen(args: &GenArgs) -> Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        cluster_count: args.clusters,
        points_per_cluster: args.per_cluster,
        dimension: args.dim,
        center_spread: args.spread,
        cluster_std: args.std,
        seed: args.seed,
    })?;
    match format_of(&args.out, &args.format)? {
        Format::Csv => write_csv(&args.out, &ds)?,
        Format::Binary => write_binary(&args.out, &ds)?,
    }
    if let Some(path) = &args.labels_out {
        write_labels(path, ds.labels().unwrap_or_default())?;
    }
    log::info!("wrote {} points to {}", ds.n(), args.out.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let pred = read_labels(&args.pred)?;
    let truth = read_labels(&args.truth)?;
    let sc = scores(&pred, &truth)?;
    println!("{}", serde_json::to_string(&MetricsReport::from(sc))?);
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.plan).with_context(|| format!("reading {}", args.plan.display()))?;
    let plan = BenchPlan::from_json(&text)?;
    let base = args.plan.parent().unwrap_or(Path::new("."));
    let rows = run_bench(&plan, base)?;
    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let summary = write_outputs(&args.out_dir, &rows)?;
    log::info!("{} runs, {} failed", rows.len(), failures);
    if let Some(s) = &summary.scaling {
        eprintln!(
            "scaling slope {:.3}{}",
            s.slope,
            if s.regression { " (above 1.3)" } else { "" }
        );
    }
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn cmd_dump(args: &DumpArgs) -> Result<()> {
    let (ds, _) = load(&args.input)?;
    if args.svg.is_some() && ds.d() > 3 {
        bail!("SVG output needs 1 to 3 dimensions, data has {}", ds.d());
    }
    let params = args.params.resolve(ds.n())?;
    let result = run_gbsk(&ds, &params)?;
    let balls = &result.key_balls.balls;
    match &args.edges {
        Some(path) => {
            let mut w = create(path)?;
            write_skeleton_csv(&mut w, balls, &result.forest)?;
            w.flush()?;
        }
        None => {
            let mut w = BufWriter::new(io::stdout().lock());
            write_skeleton_csv(&mut w, balls, &result.forest)?;
            w.flush()?;
        }
    }
    if let Some(path) = &args.balls {
        let mut w = create(path)?;
        write_balls_csv(&mut w, balls)?;
        w.flush()?;
    }
    if let Some(path) = &args.peaks {
        let mut w = create(path)?;
        write_peaks_csv(&mut w, balls)?;
        w.flush()?;
    }
    if let Some(path) = &args.svg {
        let svg = skeleton_svg(args.with_points.then_some(&ds), balls, &result.forest)?;
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    log::info!(
        "W = {}, {} edges",
        result.diagnostics.key_ball_count,
        result.forest.edge_count()
    );
    Ok(())
}

/// Sizes the global thread pool; `0` or `None` keeps rayon's default.
pub fn init_threads(threads: Option<usize>) -> Result<()> {
    if let Some(t) = threads.filter(|&t| t > 0) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring the thread pool")?;
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Agbsk(a) => cmd_agbsk(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Bench(a) => cmd_bench(a),
        Command::DumpSkeleton(a) => cmd_dump(a),
    }
}
