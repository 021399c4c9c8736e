//! Training and the repeated k-fold experiments, independent of argument
//! parsing and file handling.

use smoothsvm::{accuracy, kfold_split, train, Dataset, FoldSplit, LossFamily, LossSpec, Objective, TrainReport};

use crate::config::{LossSettings, RunConfig, SolverKind};
use crate::error::{CliError, Result};
use crate::model::ModelFile;
use crate::report::{Block, ExperimentReport, RunRecord};

/// Trains on all of `data`.
pub fn cmd_train(cfg: &RunConfig, data: &Dataset) -> Result<(ModelFile, TrainReport)> {
    let loss = cfg.validate()?;
    let obj = Objective::new(data, cfg.lambda, loss)?;
    let report = train(&obj, &cfg.solver_config(cfg.seed))?;
    let model = ModelFile::new(cfg, report.weights.clone())?;
    Ok((model, report))
}

/// Runs the `folds × repetitions` protocol with a single configuration.
pub fn cmd_cv(cfg: &RunConfig, data: &Dataset) -> Result<ExperimentReport> {
    let loss = cfg.validate()?;
    let splits = kfold_split(data, &cfg.plan())?;
    let block = run_block(cfg, &loss, data, &splits)?;
    Ok(report(cfg, "cv", vec![block]))
}

/// One cross-validation block per σ, sharing the same splits.
pub fn cmd_sweep_sigma(cfg: &RunConfig, data: &Dataset, sigmas: &[f64]) -> Result<ExperimentReport> {
    if sigmas.is_empty() {
        return Err(CliError::Config("the sigma list is empty".into()));
    }
    if !cfg.loss.family.uses_sigma() {
        return Err(CliError::Config(format!(
            "{} has no smoothing parameter to sweep",
            cfg.loss.family
        )));
    }
    let runs = sigmas
        .iter()
        .map(|&sigma| {
            let c = RunConfig {
                loss: LossSettings {
                    sigma: Some(sigma),
                    ..cfg.loss.clone()
                },
                ..cfg.clone()
            };
            c.validate().map(|loss| (c, loss))
        })
        .collect::<Result<Vec<_>>>()?;
    let splits = kfold_split(data, &cfg.plan())?;
    let blocks = runs
        .iter()
        .map(|(c, loss)| run_block(c, loss, data, &splits))
        .collect::<Result<Vec<_>>>()?;
    Ok(report(cfg, "sweep-sigma", blocks))
}

/// One cross-validation block per (solver, loss) pair. Pairs that fail
/// validation become warning blocks rather than aborting the comparison.
/// The configured σ only reaches the smooth hinge losses, so logistic and
/// exponential stay in their usual form.
pub fn cmd_compare(cfg: &RunConfig, data: &Dataset, pairs: &[(SolverKind, LossFamily)]) -> Result<ExperimentReport> {
    if pairs.is_empty() {
        return Err(CliError::Config("no solver:loss pairs to compare".into()));
    }
    let splits = kfold_split(data, &cfg.plan())?;
    let mut blocks = Vec::with_capacity(pairs.len());
    for &(solver, family) in pairs {
        let c = RunConfig {
            solver,
            loss: LossSettings {
                family,
                sigma: cfg.loss.sigma.filter(|_| is_smooth_hinge(family)),
                ..cfg.loss.clone()
            },
            ..cfg.clone()
        };
        match c.validate() {
            Ok(loss) => blocks.push(run_block(&c, &loss, data, &splits)?),
            Err(CliError::Config(msg)) => {
                log::warn!("skipping {solver}:{family}: {msg}");
                blocks.push(Block::skipped(solver.name(), family.name(), msg));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report(cfg, "compare", blocks))
}

fn is_smooth_hinge(family: LossFamily) -> bool {
    matches!(family, LossFamily::SmoothHingeG | LossFamily::SmoothHingeM)
}

fn report(cfg: &RunConfig, command: &str, blocks: Vec<Block>) -> ExperimentReport {
    ExperimentReport {
        command: command.into(),
        lambda: cfg.lambda,
        seed: cfg.seed,
        folds: cfg.folds,
        repetitions: cfg.repetitions,
        blocks,
    }
}

fn run_block(cfg: &RunConfig, loss: &LossSpec, data: &Dataset, splits: &[FoldSplit]) -> Result<Block> {
    let records = splits
        .iter()
        .enumerate()
        .map(|(k, split)| run_split(cfg, loss, data, split, cfg.seed.wrapping_add(k as u64)))
        .collect::<Result<Vec<_>>>()?;
    let sigma = loss.family().uses_sigma().then(|| loss.sigma());
    Ok(Block::completed(
        cfg.solver.name(),
        loss.family().name(),
        sigma,
        records,
    ))
}

fn run_split(cfg: &RunConfig, loss: &LossSpec, data: &Dataset, split: &FoldSplit, seed: u64) -> Result<RunRecord> {
    let train_set = data.subset(&split.train)?;
    let test_set = data.subset(&split.test)?;
    let obj = Objective::new(&train_set, cfg.lambda, loss.clone())?;
    let report = train(&obj, &cfg.solver_config(seed))?;
    if !report.converged {
        log::warn!(
            "repetition {} fold {}: stopped after {} iterations with gradient norm {:e}",
            split.repetition,
            split.fold,
            report.iterations,
            report.final_grad_norm()
        );
    }
    Ok(RunRecord {
        fold: split.fold,
        repetition: split.repetition,
        seed,
        accuracy: accuracy(&report.weights, &test_set)?,
        wall_time_seconds: report.wall_time_seconds,
        iterations: report.iterations,
        final_grad_norm: report.final_grad_norm(),
        converged: report.converged,
    })
}
