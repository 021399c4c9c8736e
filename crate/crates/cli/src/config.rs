//! Validated run settings shared by every subcommand.

use std::fmt;
use std::str::FromStr;

use clap::ValueEnum;
use smoothsvm::{
    FgdConfig, LossFamily, LossSpec, SgdConfig, SolverConfig, SplitPlan, StepSchedule, TronConfig, XiPolicy,
};

use crate::error::{CliError, Result};

/// Regularisation used by the benchmark protocol.
pub const DEFAULT_LAMBDA: f64 = 1e-5;
pub const DEFAULT_TOL: f64 = 5e-4;
pub const DEFAULT_XI: f64 = 0.1;
/// σ used by the smooth hinge losses when none is given; other families
/// default to their canonical σ = 1.
pub const DEFAULT_SMOOTH_HINGE_SIGMA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, ValueEnum)]
pub enum SolverKind {
    Tron,
    Fgd,
    Sgd,
    Pegasos,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Tron => "tron",
            SolverKind::Fgd => "fgd",
            SolverKind::Sgd => "sgd",
            SolverKind::Pegasos => "pegasos",
        }
    }

    fn from_str_exact(s: &str) -> Result<Self> {
        [SolverKind::Tron, SolverKind::Fgd, SolverKind::Sgd, SolverKind::Pegasos]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Config(format!("unknown solver `{s}`")))
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        SolverKind::from_str_exact(s)
    }
}

/// Loss family plus the raw parameters; turned into a [`LossSpec`] by
/// [`LossSettings::build`].
#[derive(Debug, Clone, PartialEq)]
pub struct LossSettings {
    pub family: LossFamily,
    /// `None` keeps the family's default margin threshold.
    pub theta: Option<f64>,
    /// `None` picks [`LossSettings::default_sigma`].
    pub sigma: Option<f64>,
    pub gamma: f64,
    pub bandwidth: f64,
    pub abs_rescale: bool,
}

impl Default for LossSettings {
    fn default() -> Self {
        LossSettings {
            family: LossFamily::SmoothHingeG,
            theta: None,
            sigma: None,
            gamma: 1.0,
            bandwidth: 1.0,
            abs_rescale: false,
        }
    }
}

impl LossSettings {
    pub fn default_sigma(family: LossFamily) -> f64 {
        match family {
            LossFamily::SmoothHingeG | LossFamily::SmoothHingeM => DEFAULT_SMOOTH_HINGE_SIGMA,
            _ => 1.0,
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma.unwrap_or_else(|| LossSettings::default_sigma(self.family))
    }

    pub fn build(&self) -> Result<LossSpec> {
        let mut b = LossSpec::builder(self.family)
            .sigma(self.sigma())
            .gamma(self.gamma)
            .bandwidth(self.bandwidth)
            .rescale_absolute(self.abs_rescale);
        if let Some(theta) = self.theta {
            b = b.theta(theta);
        }
        Ok(b.build()?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    /// Fixed CG forcing term.
    pub xi: f64,
    /// When set, the forcing term becomes `min(0.1, κ‖∇L‖)` and `xi` is
    /// ignored.
    pub kappa: Option<f64>,
    pub max_iter: Option<usize>,
    /// FGD step, or the SGD base rate `η₀`.
    pub step: Option<f64>,
    pub epochs: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: DEFAULT_TOL,
            xi: DEFAULT_XI,
            kappa: None,
            max_iter: None,
            step: None,
            epochs: SgdConfig::default().epochs,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub loss: LossSettings,
    pub lambda: f64,
    pub solver: SolverKind,
    pub options: SolverOptions,
    pub seed: u64,
    pub folds: usize,
    pub repetitions: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let plan = SplitPlan::default();
        RunConfig {
            loss: LossSettings::default(),
            lambda: DEFAULT_LAMBDA,
            solver: SolverKind::Tron,
            options: SolverOptions::default(),
            seed: plan.seed,
            folds: plan.folds,
            repetitions: plan.repetitions,
        }
    }
}

impl RunConfig {
    pub fn plan(&self) -> SplitPlan {
        SplitPlan {
            folds: self.folds,
            repetitions: self.repetitions,
            seed: self.seed,
        }
    }

    /// Checks that solver, loss and options fit together and returns the
    /// built loss. Runs before any data is touched.
    pub fn validate(&self) -> Result<LossSpec> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and nonnegative, got {}", self.lambda));
        }
        let loss = self.loss.build()?;
        let family = loss.family();
        let hinge = family == LossFamily::Hinge;
        match self.solver {
            SolverKind::Pegasos if !hinge => {
                return bad(format!("pegasos trains the hinge loss only, got {family}"));
            }
            SolverKind::Tron | SolverKind::Fgd | SolverKind::Sgd if hinge => {
                return bad(format!(
                    "the hinge loss is not differentiable; {} cannot train it (use pegasos)",
                    self.solver
                ));
            }
            SolverKind::Tron if !loss.supports_newton() => {
                return bad(format!(
                    "tron needs a convex, twice differentiable loss; {family} is not"
                ));
            }
            _ => {}
        }
        if matches!(self.solver, SolverKind::Tron | SolverKind::Pegasos) && self.lambda <= 0.0 {
            return bad(format!("{} needs lambda > 0", self.solver));
        }
        let o = &self.options;
        if !(o.tol > 0.0 && o.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", o.tol));
        }
        if !(o.xi > 0.0 && o.xi < 1.0) {
            return bad(format!("xi must lie in (0, 1), got {}", o.xi));
        }
        if let Some(k) = o.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return bad(format!("kappa must be positive, got {k}"));
            }
        }
        if let Some(s) = o.step {
            if !(s > 0.0 && s.is_finite()) {
                return bad(format!("step must be positive, got {s}"));
            }
        }
        if o.max_iter == Some(0) {
            return bad("max-iter must be at least 1".into());
        }
        if o.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if self.folds < 2 || self.repetitions == 0 {
            return bad(format!(
                "need at least 2 folds and 1 repetition, got {} and {}",
                self.folds, self.repetitions
            ));
        }
        if let SolverConfig::Tron(t) = self.solver_config(self.seed) {
            t.validate()?;
        }
        Ok(loss)
    }

    /// Solver settings; `seed` only matters to the stochastic solvers.
    pub fn solver_config(&self, seed: u64) -> SolverConfig {
        let o = &self.options;
        match self.solver {
            SolverKind::Tron => {
                let d = TronConfig::default();
                SolverConfig::Tron(TronConfig {
                    tol: o.tol,
                    max_newton_iters: o.max_iter.unwrap_or(d.max_newton_iters),
                    xi_policy: match o.kappa {
                        Some(k) => XiPolicy::GradientScaled(k),
                        None => XiPolicy::Fixed(o.xi),
                    },
                    ..d
                })
            }
            SolverKind::Fgd => SolverConfig::Fgd(FgdConfig {
                step: o.step,
                max_iters: o.max_iter.unwrap_or(FgdConfig::default().max_iters),
                tol: o.tol,
            }),
            SolverKind::Sgd => SolverConfig::Sgd(SgdConfig {
                epochs: o.epochs,
                step_schedule: StepSchedule::InverseT(o.step.unwrap_or(1.0)),
                seed,
            }),
            SolverKind::Pegasos => SolverConfig::Pegasos(SgdConfig {
                epochs: o.epochs,
                step_schedule: StepSchedule::PegasosRate,
                seed,
            }),
        }
    }
}

/// Parses `2^-3`-style powers as well as plain numbers.
pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('^') {
        Some((base, exp)) => {
            let base: f64 = base.trim().parse().map_err(|_| format!("bad base in `{s}`"))?;
            let exp: i32 = exp.trim().parse().map_err(|_| format!("bad exponent in `{s}`"))?;
            base.powi(exp)
        }
        None => s.parse().map_err(|_| format!("`{s}` is not a number"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// `solver:loss`, e.g. `tron:logistic`.
pub fn parse_pair(s: &str) -> std::result::Result<(SolverKind, LossFamily), String> {
    let (solver, loss) = s
        .split_once(':')
        .ok_or_else(|| format!("expected solver:loss, got `{s}`"))?;
    let solver = SolverKind::from_str_exact(solver.trim()).map_err(|e| e.to_string())?;
    let loss: LossFamily = loss.trim().parse().map_err(|e: smoothsvm::Error| e.to_string())?;
    Ok((solver, loss))
}

pub fn parse_family(s: &str) -> std::result::Result<LossFamily, String> {
    s.parse().map_err(|e: smoothsvm::Error| e.to_string())
}

/// The σ grid of the sensitivity study: four coarse points, then every
/// integer power from `2⁻¹⁰` to `2⁵`.
pub fn default_sigma_grid() -> Vec<f64> {
    [-30, -25, -20, -15]
        .into_iter()
        .chain(-10..=5)
        .map(|e| 2f64.powi(e))
        .collect()
}

/// Pairs compared by default: the four smooth TRON losses and Pegasos.
pub fn default_pairs() -> Vec<(SolverKind, LossFamily)> {
    vec![
        (SolverKind::Tron, LossFamily::Logistic),
        (SolverKind::Tron, LossFamily::SquaredHinge),
        (SolverKind::Tron, LossFamily::SmoothHingeM),
        (SolverKind::Tron, LossFamily::SmoothHingeG),
        (SolverKind::Pegasos, LossFamily::Hinge),
    ]
}
