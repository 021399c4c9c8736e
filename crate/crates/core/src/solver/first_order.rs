use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::objective::{norm, Objective};
use super::{require_differentiable, TrainReport};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::LossFamily;

#[derive(Debug, Clone, PartialEq)]
pub struct FgdConfig {
    /// Fixed step size; `None` uses `1/smoothness_bound`.
    pub step: Option<f64>,
    pub max_iters: usize,
    /// Stop once `‖∇L‖ ≤ tol`.
    pub tol: f64,
}

impl Default for FgdConfig {
    fn default() -> Self {
        FgdConfig {
            step: None,
            max_iters: 1000,
            tol: 5e-4,
        }
    }
}

/// Full gradient descent with a constant step.
pub fn fgd_train(obj: &Objective<'_>, cfg: &FgdConfig) -> Result<TrainReport> {
    require_differentiable(obj)?;
    let bound = obj.smoothness_bound();
    let step = match cfg.step {
        Some(s) if s > 0.0 && s.is_finite() => s,
        Some(s) => return Err(Error::InvalidConfig(format!("step must be positive, got {s}"))),
        None if bound.is_finite() => 1.0 / bound,
        None => {
            return Err(Error::InvalidConfig(format!(
                "the {} loss has unbounded curvature; pass an explicit step",
                obj.loss().family()
            )))
        }
    };
    if step * bound > 1.0 {
        log::warn!("step {step:e} exceeds the safe bound 1/{bound:e}; descent is not guaranteed");
    }

    let start = Instant::now();
    let mut w = vec![0.0; obj.dim()];
    let mut report = empty_report();
    loop {
        let margins = obj.margins(&w)?;
        let f = obj.value_at(&w, &margins);
        let g = obj.gradient_at(&w, &margins)?;
        let gnorm = norm(&g);
        report.objective_trace.push(f);
        report.grad_norm_trace.push(gnorm);
        report.radius_trace.push(step);
        report.cg_iters_trace.push(0);
        if gnorm <= cfg.tol {
            report.converged = true;
            break;
        }
        if report.iterations >= cfg.max_iters {
            break;
        }
        for (wi, gi) in w.iter_mut().zip(&g) {
            *wi -= step * gi;
        }
        report.iterations += 1;
    }
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    report.weights = w;
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSchedule {
    /// `η_t = η₀/(1 + t)` for `t = 0, 1, ...`.
    InverseT(f64),
    /// `η_t = 1/(λt)` for `t = 1, 2, ...`.
    PegasosRate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgdConfig {
    /// Each epoch draws `n` instances uniformly with replacement.
    pub epochs: usize,
    pub step_schedule: StepSchedule,
    pub seed: u64,
}

impl Default for SgdConfig {
    fn default() -> Self {
        SgdConfig {
            epochs: 10,
            step_schedule: StepSchedule::InverseT(1.0),
            seed: 0,
        }
    }
}

impl StepSchedule {
    fn rate(&self, t: usize, lambda: f64) -> f64 {
        match *self {
            StepSchedule::InverseT(eta0) => eta0 / (1.0 + t as f64),
            StepSchedule::PegasosRate => 1.0 / (lambda * (t + 1) as f64),
        }
    }

    fn validate(&self, lambda: f64) -> Result<()> {
        match *self {
            StepSchedule::InverseT(eta0) if !(eta0 > 0.0 && eta0.is_finite()) => Err(Error::InvalidConfig(format!(
                "initial step must be positive, got {eta0}"
            ))),
            StepSchedule::PegasosRate if !(lambda > 0.0) => {
                Err(Error::InvalidConfig("the 1/(λt) schedule needs lambda > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// `w = scale · v`, so the shrink `w ← (1 - ηλ)w` costs O(1).
struct ScaledVector {
    scale: f64,
    v: Vec<f64>,
}

impl ScaledVector {
    fn zeros(p: usize) -> Self {
        ScaledVector {
            scale: 1.0,
            v: vec![0.0; p],
        }
    }

    fn shrink(&mut self, factor: f64) {
        if factor <= 0.0 {
            self.scale = 1.0;
            self.v.fill(0.0);
            return;
        }
        self.scale *= factor;
        if self.scale < 1e-9 {
            let s = self.scale;
            self.v.iter_mut().for_each(|x| *x *= s);
            self.scale = 1.0;
        }
    }

    fn row_dot(&self, d: &Dataset, i: usize) -> f64 {
        self.scale * d.features().row_dot(i, &self.v)
    }

    fn add_row(&mut self, d: &Dataset, i: usize, coef: f64) {
        let c = coef / self.scale;
        let (cols, vals) = d.features().row(i);
        for (&j, &x) in cols.iter().zip(vals) {
            self.v[j] += c * x;
        }
    }

    fn to_vec(&self) -> Vec<f64> {
        self.v.iter().map(|x| x * self.scale).collect()
    }
}

/// Stochastic gradient descent: `w ← w - η_t[λw + ψ'(α_i) y_i x_i]`.
pub fn sgd_train(obj: &Objective<'_>, cfg: &SgdConfig) -> Result<TrainReport> {
    require_differentiable(obj)?;
    let loss = obj.loss().clone();
    stochastic(
        obj,
        cfg,
        |alpha| loss.grad(alpha).expect("differentiability checked"),
        |w, m| obj.gradient_at(w, m),
    )
}

/// Pegasos: the stochastic update with the hinge subgradient
/// `-𝟙(α_i < θ)`, and the `1/(λt)` schedule.
pub fn pegasos_train(obj: &Objective<'_>, cfg: &SgdConfig) -> Result<TrainReport> {
    let loss = obj.loss();
    if loss.family() != LossFamily::Hinge {
        return Err(Error::WrongLoss(loss.family()));
    }
    let theta = loss.theta();
    let subgradient = move |alpha: f64| if alpha < theta { -1.0 } else { 0.0 };
    stochastic(obj, cfg, subgradient, |w, m| {
        let n = obj.dataset().n_instances() as f64;
        let coef: Vec<f64> = m
            .iter()
            .zip(obj.dataset().labels())
            .map(|(&a, &y)| subgradient(a) * f64::from(y) / n)
            .collect();
        let mut g = obj.dataset().features().transpose_matvec(&coef)?;
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi += obj.lambda() * wi;
        }
        Ok(g)
    })
}

fn stochastic<D, G>(obj: &Objective<'_>, cfg: &SgdConfig, dloss: D, full_gradient: G) -> Result<TrainReport>
where
    D: Fn(f64) -> f64,
    G: Fn(&[f64], &[f64]) -> Result<Vec<f64>>,
{
    let lambda = obj.lambda();
    cfg.step_schedule.validate(lambda)?;
    let data = obj.dataset();
    let n = data.n_instances();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let start = Instant::now();
    let mut w = ScaledVector::zeros(obj.dim());
    let mut report = empty_report();
    let mut t = 0usize;

    let record = |w: &[f64], eta: f64, report: &mut TrainReport| -> Result<()> {
        let margins = obj.margins(w)?;
        report.objective_trace.push(obj.value_at(w, &margins));
        report.grad_norm_trace.push(norm(&full_gradient(w, &margins)?));
        report.radius_trace.push(eta);
        report.cg_iters_trace.push(0);
        Ok(())
    };
    record(&w.to_vec(), cfg.step_schedule.rate(0, lambda), &mut report)?;

    for _ in 0..cfg.epochs {
        for _ in 0..n {
            let i = rng.random_range(0..n);
            let eta = cfg.step_schedule.rate(t, lambda);
            let y = f64::from(data.labels()[i]);
            let alpha = y * w.row_dot(data, i);
            let d = dloss(alpha);
            w.shrink(1.0 - eta * lambda);
            if d != 0.0 {
                w.add_row(data, i, -eta * d * y);
            }
            t += 1;
        }
        report.iterations += 1;
        record(&w.to_vec(), cfg.step_schedule.rate(t, lambda), &mut report)?;
    }
    report.converged = true;
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    report.weights = w.to_vec();
    Ok(report)
}

fn empty_report() -> TrainReport {
    TrainReport {
        weights: Vec::new(),
        iterations: 0,
        grad_norm_trace: Vec::new(),
        objective_trace: Vec::new(),
        cg_iters_trace: Vec::new(),
        radius_trace: Vec::new(),
        wall_time_seconds: 0.0,
        converged: false,
    }
}
