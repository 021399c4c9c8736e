//! Training the regularised objective: trust-region Newton (TRON) with a
//! conjugate gradient inner solver, plus full-gradient, stochastic gradient
//! and Pegasos baselines.

mod cg;
mod first_order;
mod objective;
mod tron;

use serde::Serialize;

use crate::error::{Error, Result};

pub use cg::{boundary_fraction, cg_subproblem, CgOutcome, CgStatus};
pub use first_order::{fgd_train, pegasos_train, sgd_train, FgdConfig, SgdConfig, StepSchedule};
pub use objective::Objective;
pub use tron::{tron_train, trust_region_update, TronConfig, XiPolicy};

/// Iterate history of a training run. All traces have one entry per
/// recorded iterate: the start of every outer iteration, plus the final
/// point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrainReport {
    pub weights: Vec<f64>,
    pub iterations: usize,
    pub grad_norm_trace: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub cg_iters_trace: Vec<usize>,
    pub radius_trace: Vec<f64>,
    pub wall_time_seconds: f64,
    pub converged: bool,
}

impl TrainReport {
    pub fn final_grad_norm(&self) -> f64 {
        self.grad_norm_trace.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_objective(&self) -> f64 {
        self.objective_trace.last().copied().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Clone)]
pub enum SolverConfig {
    Tron(TronConfig),
    Fgd(FgdConfig),
    Sgd(SgdConfig),
    Pegasos(SgdConfig),
}

impl SolverConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SolverConfig::Tron(_) => "tron",
            SolverConfig::Fgd(_) => "fgd",
            SolverConfig::Sgd(_) => "sgd",
            SolverConfig::Pegasos(_) => "pegasos",
        }
    }
}

pub fn train(obj: &Objective<'_>, cfg: &SolverConfig) -> Result<TrainReport> {
    match cfg {
        SolverConfig::Tron(c) => tron_train(obj, c),
        SolverConfig::Fgd(c) => fgd_train(obj, c),
        SolverConfig::Sgd(c) => sgd_train(obj, c),
        SolverConfig::Pegasos(c) => pegasos_train(obj, c),
    }
}

fn require_differentiable(obj: &Objective<'_>) -> Result<()> {
    if obj.loss().is_differentiable() {
        Ok(())
    } else {
        Err(Error::NonDifferentiable {
            family: obj.loss().family(),
        })
    }
}
