//! `interp`: build, compile, evaluate and benchmark interpolating predictors.
//!
//! Exit status is 0 on success, 2 when the input is rejected (bad data,
//! failed alignment, a model that does not interpolate), 1 otherwise.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use interp_core::bench::{self, ExperimentPlan, PredictorKind, Schedule};
use interp_core::data::{read_points_csv, Dataset};
use interp_core::geometry::{align_offset, CubicPartition};
use interp_core::histogram::{fit_histogram, LossKind};
use interp_core::interpolate::{bad_erm, check_interpolation, good_erm};
use interp_core::model::{load_model, Model, ModelDoc};
use interp_core::relunet::{compile_histogram, compile_interpolant, ReluNet};
use interp_core::risk::DistributionSpec;
use interp_core::Predictor;

#[derive(Parser)]
#[command(name = "interp", version, about = "Interpolating histogram rules and their ReLU networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a histogram rule on a cubic partition.
    FitHistogram(FitArgs),
    /// Build an interpolating inflated histogram.
    BuildInterpolant(BuildArgs),
    /// Compile a model into a ReLU network and report its architecture.
    CompileDnn(CompileArgs),
    /// Evaluate a model or network on a table of points.
    Eval(EvalArgs),
    /// Check that a model or network attains the smallest empirical risk.
    VerifyInterpolation(VerifyArgs),
    /// Run a rate experiment and write one CSV row per (n, repetition, predictor).
    Experiment(ExperimentArgs),
    /// Write the dense weight document of a model or network.
    ExportWeights(ExportArgs),
    /// Draw a labeled sample from a distribution config.
    Sample(SampleArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "least_squares")]
    loss: LossKind,
    #[arg(long)]
    width: f64,
    /// Comma-separated offset; defaults to the aligned offset of the distinct samples.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    offset: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "least_squares")]
    loss: LossKind,
    #[arg(long)]
    width: f64,
    #[arg(long, conflicts_with = "bad", required_unless_present = "bad")]
    good: bool,
    #[arg(long)]
    bad: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    model: PathBuf,
    /// Shell width for plain histograms (inflated histograms use a third of their radius).
    #[arg(long)]
    eps: Option<f64>,
    /// Where to write the weight document.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "source")]
struct Source {
    #[arg(long, group = "source")]
    model: Option<PathBuf>,
    #[arg(long, group = "source")]
    weights: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    source: Source,
    /// CSV with header x1,...,xd (a y column is ignored).
    #[arg(long)]
    points: PathBuf,
    /// Output CSV (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "least_squares")]
    loss: LossKind,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Distribution config (key = value lines).
    #[arg(long)]
    dist: PathBuf,
    #[arg(long, default_value = "least_squares")]
    loss: LossKind,
    /// Defaults to the largest admissible value 2α/(2α+d).
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    n_grid: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 100_000)]
    mc: usize,
    /// Defaults to the seed of the config, else 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "good_erm,bad_erm,good_dnn,bad_dnn")]
    predictors: Vec<PredictorKind>,
    #[arg(long, default_value = "power")]
    schedule: Schedule,
    /// Add a wall_ms column (the CSV is then no longer reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    dist: PathBuf,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

/// Marker for checks that ran but did not pass.
#[derive(Debug)]
struct Rejected(String);

impl std::fmt::Display for Rejected {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Rejected {}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn load_data(path: &Path) -> Result<Dataset> {
    Dataset::load_csv(path).with_context(|| format!("reading {}", path.display()))
}

fn write_model(doc: &ModelDoc, out: &Path) -> Result<()> {
    let mut w = create(out)?;
    w.write_all(doc.to_json().as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

fn compile(model: &Model, eps: Option<f64>) -> Result<ReluNet> {
    Ok(match model {
        Model::Histogram(h) => {
            let eps = eps.context("--eps is required to compile a plain histogram")?;
            compile_histogram(h, eps)?
        }
        Model::Inflated(f) => {
            if eps.is_some() {
                bail!(Rejected("--eps does not apply to inflated histograms".into()));
            }
            compile_interpolant(f)?
        }
    })
}

enum Loaded {
    Model(Model),
    Net(ReluNet),
}

impl Loaded {
    fn read(src: &Source) -> Result<Self> {
        match (&src.model, &src.weights) {
            (Some(p), None) => Ok(Loaded::Model(load_model(p).with_context(|| format!("reading {}", p.display()))?)),
            (None, Some(p)) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                Ok(Loaded::Net(ReluNet::from_json(&text)?))
            }
            _ => bail!("exactly one of --model and --weights is required"),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Loaded::Model(m) => m.dim(),
            Loaded::Net(n) => n.input_dim(),
        }
    }

    fn predictor(&self) -> &dyn Predictor {
        match self {
            Loaded::Model(m) => m,
            Loaded::Net(n) => n,
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::FitHistogram(a) => {
            let data = load_data(&a.data)?;
            let part = match a.offset {
                Some(off) => CubicPartition::new(a.width, off)?,
                None => {
                    let targets = interp_core::interpolate::distinct_targets(&data, a.loss)?;
                    let centers: Vec<&[f64]> = targets.iter().map(|t| t.center.as_slice()).collect();
                    align_offset(&centers, a.width)?.partition(a.width)?
                }
            };
            let h = fit_histogram(&data, &part, a.loss)?;
            write_model(&ModelDoc::from_histogram(&h, Some(a.loss)), &a.out)
        }
        Command::BuildInterpolant(a) => {
            let data = load_data(&a.data)?;
            let f = if a.bad {
                bad_erm(&data, a.width, a.loss)?
            } else {
                good_erm(&data, a.width, a.loss)?
            };
            write_model(&ModelDoc::from_inflated(&f, Some(a.loss)), &a.out)
        }
        Command::CompileDnn(a) => {
            let model = load_model(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
            let net = compile(&model, a.eps)?;
            if let Some(out) = &a.out {
                let mut w = create(out)?;
                net.write_json(&mut w)?;
                w.flush()?;
            }
            println!("{}", serde_json::to_string(&net.architecture())?);
            Ok(())
        }
        Command::Eval(a) => {
            let src = Loaded::read(&a.source)?;
            let file = File::open(&a.points).with_context(|| format!("reading {}", a.points.display()))?;
            let (dim, xs) = read_points_csv(file)?;
            if dim != src.dim() {
                bail!(Rejected(format!("points have dimension {dim}, model expects {}", src.dim())));
            }
            let out: Box<dyn Write> = match &a.out {
                Some(p) => Box::new(create(p)?),
                None => Box::new(std::io::stdout().lock()),
            };
            let mut out = BufWriter::new(out);
            let header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
            writeln!(out, "{},prediction", header.join(","))?;
            for x in xs.chunks_exact(dim) {
                let v = match &src {
                    Loaded::Model(m) => m.predict(x)?,
                    Loaded::Net(n) => n.eval(x)?,
                };
                let cols: Vec<String> = x.iter().map(f64::to_string).collect();
                writeln!(out, "{},{v}", cols.join(","))?;
            }
            out.flush()?;
            Ok(())
        }
        Command::VerifyInterpolation(a) => {
            let src = Loaded::read(&a.source)?;
            let data = load_data(&a.data)?;
            if data.dim() != src.dim() {
                bail!(Rejected(format!("data have dimension {}, model expects {}", data.dim(), src.dim())));
            }
            let check = check_interpolation(src.predictor(), &data, a.loss)?;
            println!(
                "{}",
                serde_json::json!({
                    "empirical_risk": check.empirical_risk,
                    "bayes_empirical_risk": check.bayes_empirical_risk,
                    "gap": check.gap,
                    "interpolates": check.interpolates,
                })
            );
            if !check.interpolates {
                bail!(Rejected("predictor does not interpolate the data".into()));
            }
            Ok(())
        }
        Command::Experiment(a) => {
            let dist = DistributionSpec::load(&a.dist).with_context(|| format!("reading {}", a.dist.display()))?;
            let seed = a.seed.or(dist.seed()).unwrap_or(0);
            let mut plan = ExperimentPlan::new(dist, a.loss, a.n_grid, a.reps, seed);
            if let Some(g) = a.gamma {
                plan.gamma = g;
            }
            plan.mc_eval_points = a.mc;
            plan.predictors = a.predictors;
            plan.threads = a.threads;
            plan.schedule = a.schedule;
            plan.timing = a.timing;
            let rows = bench::run_experiment(&plan)?;
            let mut w = create(&a.out)?;
            bench::write_rows_csv(&rows, &mut w, a.timing)?;
            w.flush()?;
            Ok(())
        }
        Command::ExportWeights(a) => {
            let net = match Loaded::read(&a.source)? {
                Loaded::Model(m) => compile(&m, a.eps)?,
                Loaded::Net(n) => n,
            };
            let mut w = create(&a.out)?;
            net.write_json(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Command::Sample(a) => {
            let dist = DistributionSpec::load(&a.dist).with_context(|| format!("reading {}", a.dist.display()))?;
            let seed = a.seed.or(dist.seed()).unwrap_or(0);
            let data = dist.sample(a.n, seed)?;
            let w = create(&a.out)?;
            data.write_csv(w)?;
            Ok(())
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Rejected>().is_some() {
        return 2;
    }
    match err.downcast_ref::<interp_core::Error>() {
        Some(e) if e.is_validation() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
