//! Argument definitions and the dispatch from subcommands to experiments.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use smoothsvm::{parse_libsvm, predict, synthetic_dataset, write_libsvm, Dataset, LossFamily};

use crate::config::{
    default_pairs, default_sigma_grid, parse_family, parse_pair, parse_real, LossSettings, RunConfig, SolverKind,
    SolverOptions,
};
use crate::error::{CliError, Result};
use crate::experiment::{cmd_compare, cmd_cv, cmd_sweep_sigma, cmd_train};
use crate::model::{write_json, ModelFile};
use crate::report::{ExperimentReport, ReportFormat};

/// Relative dataset paths that do not exist under the working directory are
/// looked up under this directory.
pub const DATA_DIR_ENV: &str = "SMOOTHSVM_DATA_DIR";

/// Exit status for runs that hit their iteration budget.
pub const EXIT_NOT_CONVERGED: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "smoothsvm",
    version,
    about = "Linear classifiers with smooth convex surrogate losses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train on a LIBSVM file and write the model as JSON.
    Train(TrainArgs),
    /// Print one predicted label per instance.
    Predict(PredictArgs),
    /// Print the accuracy of a model on a labelled dataset.
    Eval(EvalArgs),
    /// Repeated k-fold cross-validation with one configuration.
    Cv(CvArgs),
    /// Cross-validation over a grid of smoothing parameters.
    SweepSigma(SweepArgs),
    /// Cross-validation over several solver:loss pairs.
    Compare(CompareArgs),
    /// Write a synthetic linearly separable dataset.
    Synth(SynthArgs),
}

#[derive(Debug, Clone, Args)]
pub struct LossArgs {
    /// hinge, sq-hinge, smooth-hinge-g, smooth-hinge-m, logistic, exponential,
    /// least-squares, smooth-abs, srelu, shalev-gamma or wang-kh.
    #[arg(long, default_value = "smooth-hinge-g", value_parser = parse_family)]
    pub loss: LossFamily,
    /// Margin threshold; defaults to the family's own.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_real)]
    pub theta: Option<f64>,
    /// Smoothing parameter; accepts powers such as 2^-3. Defaults to 0.5
    /// for the smooth hinge losses and 1 otherwise.
    #[arg(long, value_parser = parse_real)]
    pub sigma: Option<f64>,
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub gamma: f64,
    /// Kernel bandwidth of wang-kh.
    #[arg(long, default_value = "1", value_parser = parse_real)]
    pub bandwidth: f64,
    /// Scale smooth-abs by 2/π so it tends to the plain absolute loss.
    #[arg(long)]
    pub abs_rescale: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value = "1e-5", value_parser = parse_real)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = SolverKind::Tron)]
    pub solver: SolverKind,
    /// Gradient-norm stopping tolerance (tron, fgd).
    #[arg(long, default_value = "5e-4", value_parser = parse_real)]
    pub tol: f64,
    /// Fixed CG forcing term (tron).
    #[arg(long, default_value = "0.1", value_parser = parse_real)]
    pub xi: f64,
    /// Use the forcing term min(0.1, kappa·‖∇L‖) instead of --xi (tron).
    #[arg(long, value_parser = parse_real)]
    pub kappa: Option<f64>,
    /// Outer iteration cap (tron, fgd).
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Step size (fgd) or base rate η₀ of η₀/(1+t) (sgd).
    #[arg(long, value_parser = parse_real)]
    pub step: Option<f64>,
    /// Passes over the data (sgd, pegasos).
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 4)]
    pub reps: usize,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    pub format: ReportFormat,
    /// Report destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub loss: LossArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub model: PathBuf,
    /// Also write the iterate traces as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub data: PathBuf,
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    pub data: PathBuf,
    #[command(flatten)]
    pub loss: LossArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub cv: CvArgs,
    /// Comma-separated σ values; defaults to 2^-30, 2^-25, 2^-20, 2^-15,
    /// 2^-10, 2^-9, ..., 2^5.
    #[arg(long, value_delimiter = ',', value_parser = parse_real)]
    pub sigmas: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub cv: CvArgs,
    /// Comma-separated solver:loss pairs, e.g. tron:logistic,pegasos:hinge.
    /// Only the smooth hinge losses take --sigma; the others keep σ = 1.
    #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
    pub pairs: Vec<(SolverKind, LossFamily)>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub p: usize,
    /// Stored entries per instance.
    #[arg(long, default_value_t = 20)]
    pub nnz: usize,
    /// Standard deviation of the label noise added to the margin.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the labelling direction as a JSON array.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

impl LossArgs {
    fn settings(&self) -> LossSettings {
        LossSettings {
            family: self.loss,
            theta: self.theta,
            sigma: self.sigma,
            gamma: self.gamma,
            bandwidth: self.bandwidth,
            abs_rescale: self.abs_rescale,
        }
    }
}

fn run_config(loss: &LossArgs, s: &SolverArgs, protocol: Option<&ProtocolArgs>) -> RunConfig {
    let d = RunConfig::default();
    RunConfig {
        loss: loss.settings(),
        lambda: s.lambda,
        solver: s.solver,
        options: SolverOptions {
            tol: s.tol,
            xi: s.xi,
            kappa: s.kappa,
            max_iter: s.max_iter,
            step: s.step,
            epochs: s.epochs,
        },
        seed: s.seed,
        folds: protocol.map_or(d.folds, |p| p.folds),
        repetitions: protocol.map_or(d.repetitions, |p| p.reps),
    }
}

impl CvArgs {
    fn config(&self) -> RunConfig {
        run_config(&self.loss, &self.solver, Some(&self.protocol))
    }
}

/// Resolves a dataset path against [`DATA_DIR_ENV`] when it is relative and
/// missing from the working directory.
pub fn resolve_data_path(path: &Path) -> PathBuf {
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    match std::env::var_os(DATA_DIR_ENV) {
        Some(root) => Path::new(&root).join(path),
        None => path.to_path_buf(),
    }
}

pub fn load_dataset(path: &Path, dim: Option<usize>) -> Result<Dataset> {
    let path = resolve_data_path(path);
    let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
    parse_libsvm(BufReader::new(file), dim).map_err(|e| match e {
        smoothsvm::Error::Io(e) => CliError::io(&path, e),
        smoothsvm::Error::Parse(p) => CliError::Data(format!("{}: {p}", path.display())),
        other => other.into(),
    })
}

fn with_output<F>(out: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match out {
        Some(path) => {
            let file = File::create(path).map_err(|e| CliError::io(path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| CliError::io(path, e))
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            Ok(w.flush()?)
        }
    }
}

fn emit(report: &ExperimentReport, output: &OutputArgs) -> Result<u8> {
    with_output(output.out.as_deref(), |w| report.write(output.format, w))?;
    eprint!("{}", report.table());
    Ok(if report.all_converged() { 0 } else { EXIT_NOT_CONVERGED })
}

/// Runs one parsed command line and returns the process exit status.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Train(a) => {
            let cfg = run_config(&a.loss, &a.solver, None);
            cfg.validate()?;
            let data = load_dataset(&a.data, None)?;
            let (model, report) = cmd_train(&cfg, &data)?;
            model.save(&a.model)?;
            if let Some(path) = &a.report {
                write_json(path, &report)?;
            }
            eprintln!(
                "{} iterations, gradient norm {:e}, objective {:e}",
                report.iterations,
                report.final_grad_norm(),
                report.final_objective()
            );
            if report.converged {
                Ok(0)
            } else {
                eprintln!("warning: stopped at the iteration cap before reaching the tolerance");
                Ok(EXIT_NOT_CONVERGED)
            }
        }
        Command::Predict(a) => {
            let model = ModelFile::load(&a.model)?;
            let data = load_dataset(&a.data, Some(model.n_features))?;
            let labels = predict(&model.weights, &data)?;
            with_output(a.out.as_deref(), |w| {
                for y in labels {
                    writeln!(w, "{}", if y > 0 { "+1" } else { "-1" })?;
                }
                Ok(())
            })?;
            Ok(0)
        }
        Command::Eval(a) => {
            let model = ModelFile::load(&a.model)?;
            let data = load_dataset(&a.data, Some(model.n_features))?;
            println!("{}", smoothsvm::accuracy(&model.weights, &data)?);
            Ok(0)
        }
        Command::Cv(a) => {
            let cfg = a.config();
            cfg.validate()?;
            let data = load_dataset(&a.data, None)?;
            emit(&cmd_cv(&cfg, &data)?, &a.output)
        }
        Command::SweepSigma(a) => {
            let cfg = a.cv.config();
            let sigmas = if a.sigmas.is_empty() {
                default_sigma_grid()
            } else {
                a.sigmas
            };
            cfg.validate()?;
            let data = load_dataset(&a.cv.data, None)?;
            emit(&cmd_sweep_sigma(&cfg, &data, &sigmas)?, &a.cv.output)
        }
        Command::Compare(a) => {
            let cfg = a.cv.config();
            let pairs = if a.pairs.is_empty() { default_pairs() } else { a.pairs };
            let data = load_dataset(&a.cv.data, None)?;
            emit(&cmd_compare(&cfg, &data, &pairs)?, &a.cv.output)
        }
        Command::Synth(a) => {
            let s = synthetic_dataset(a.n, a.p, a.nnz, a.noise, a.seed)?;
            with_output(Some(&a.out), |w| Ok(write_libsvm(&s.dataset, w)?))?;
            if let Some(path) = &a.weights {
                write_json(path, &s.hidden_weights)?;
            }
            Ok(0)
        }
    }
}
