use std::time::Instant;

use super::cg::{cg_subproblem, CgStatus};
use super::objective::{dot, norm, Objective};
use super::{require_differentiable, TrainReport};
use crate::error::{Error, Result};

/// How the CG residual tolerance `ξ_t` is chosen each outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum XiPolicy {
    Fixed(f64),
    /// `ξ_t = min(0.1, κ‖∇L(w_t)‖)`.
    GradientScaled(f64),
}

impl XiPolicy {
    pub fn xi(&self, grad_norm: f64) -> f64 {
        match *self {
            XiPolicy::Fixed(xi) => xi,
            XiPolicy::GradientScaled(kappa) => (kappa * grad_norm).min(0.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TronConfig {
    pub tol: f64,
    pub max_newton_iters: usize,
    /// `None` means `min(2p, 500)`.
    pub max_cg_iters: Option<usize>,
    pub xi_policy: XiPolicy,
    pub eta0: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub delta3: f64,
}

impl Default for TronConfig {
    fn default() -> Self {
        TronConfig {
            tol: 5e-4,
            max_newton_iters: 200,
            max_cg_iters: None,
            xi_policy: XiPolicy::Fixed(0.1),
            eta0: 1e-4,
            eta1: 0.25,
            eta2: 0.75,
            delta1: 0.25,
            delta2: 0.5,
            delta3: 4.0,
        }
    }
}

impl TronConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if !(0.0 < self.eta0 && self.eta0 < self.eta1 && self.eta1 < self.eta2 && self.eta2 < 1.0) {
            return bad(format!(
                "need 0 < eta0 < eta1 < eta2 < 1, got {}, {}, {}",
                self.eta0, self.eta1, self.eta2
            ));
        }
        if !(0.0 < self.delta1 && self.delta1 < self.delta2 && self.delta2 < 1.0 && 1.0 < self.delta3) {
            return bad(format!(
                "need 0 < delta1 < delta2 < 1 < delta3, got {}, {}, {}",
                self.delta1, self.delta2, self.delta3
            ));
        }
        let xi_ok = match self.xi_policy {
            XiPolicy::Fixed(xi) => xi > 0.0 && xi < 1.0,
            XiPolicy::GradientScaled(k) => k > 0.0 && k.is_finite(),
        };
        if !xi_ok {
            return bad(format!("invalid forcing policy {:?}", self.xi_policy));
        }
        if self.max_cg_iters == Some(0) {
            return bad("max_cg_iters must be positive".into());
        }
        Ok(())
    }

    fn cg_cap(&self, p: usize) -> usize {
        self.max_cg_iters.unwrap_or_else(|| (2 * p).clamp(1, 500))
    }
}

/// Next trust radius. Shrinking branches take the midpoint of their
/// interval; the growth branch takes `δ₃Δ` after a boundary step and
/// `min(δ₃Δ, 2Δ)` otherwise.
pub fn trust_region_update(rho: f64, delta: f64, step_norm: f64, hit_boundary: bool, cfg: &TronConfig) -> f64 {
    if !(rho > cfg.eta1) {
        let lo = cfg.delta1 * step_norm.min(delta);
        let hi = cfg.delta2 * delta;
        0.5 * (lo + hi)
    } else if rho < cfg.eta2 {
        0.5 * (cfg.delta1 + cfg.delta2) * delta
    } else if hit_boundary {
        cfg.delta3 * delta
    } else {
        (cfg.delta3 * delta).min(2.0 * delta)
    }
}

// Below this ratio of predicted change to objective the direct difference
// L(w + s) - L(w) is mostly rounding error.
const DIRECT_DIFFERENCE_FLOOR: f64 = 1e-6;

/// Trust-region Newton from `w = 0` with `Δ₀ = ‖∇L(0)‖`.
pub fn tron_train(obj: &Objective<'_>, cfg: &TronConfig) -> Result<TrainReport> {
    cfg.validate()?;
    require_differentiable(obj)?;
    let loss = obj.loss();
    if !loss.supports_newton() {
        return Err(Error::InvalidConfig(format!(
            "the {} loss has negative curvature somewhere; TRON needs a convex twice-differentiable loss",
            loss.family()
        )));
    }
    if !(obj.lambda() > 0.0) {
        return Err(Error::InvalidConfig("TRON needs lambda > 0".into()));
    }

    let start = Instant::now();
    let p = obj.dim();
    let cg_cap = cfg.cg_cap(p);
    let mut w = vec![0.0; p];
    let mut margins = obj.margins(&w)?;
    let mut f = obj.value_at(&w, &margins);
    let mut g = obj.gradient_at(&w, &margins)?;
    let mut gnorm = norm(&g);
    let mut delta = gnorm;

    let mut report = TrainReport {
        weights: Vec::new(),
        iterations: 0,
        grad_norm_trace: Vec::new(),
        objective_trace: Vec::new(),
        cg_iters_trace: Vec::new(),
        radius_trace: Vec::new(),
        wall_time_seconds: 0.0,
        converged: false,
    };

    loop {
        report.objective_trace.push(f);
        report.grad_norm_trace.push(gnorm);
        report.radius_trace.push(delta);
        if gnorm <= cfg.tol {
            report.converged = true;
            report.cg_iters_trace.push(0);
            break;
        }
        if report.iterations >= cfg.max_newton_iters {
            report.cg_iters_trace.push(0);
            break;
        }
        report.iterations += 1;

        let d = obj.hessian_diagonal_at(&margins)?;
        let h = crate::sparse::HessianOperator::new(obj.lambda(), obj.dataset().features(), d)?;
        let xi = cfg.xi_policy.xi(gnorm);
        let cg = cg_subproblem(&g, &h, delta, xi, cg_cap)?;
        report.cg_iters_trace.push(cg.iterations);
        let s = cg.step;
        let step_norm = norm(&s);
        let predicted = dot(&g, &s) + 0.5 * h.quadratic_form(&s)?;

        if !(predicted.abs() >= 1e-300) {
            log::debug!("degenerate predicted reduction {predicted:e}; shrinking radius");
            delta *= 0.5;
            continue;
        }

        let w_new: Vec<f64> = w.iter().zip(&s).map(|(a, b)| a + b).collect();
        let margins_new = obj.margins(&w_new)?;
        let f_new = obj.value_at(&w_new, &margins_new);
        let actual = if predicted.abs() < DIRECT_DIFFERENCE_FLOOR * f.abs().max(f64::MIN_POSITIVE) {
            obj.integrated_change(&w, &margins, &s)?
        } else {
            f_new - f
        };
        let rho = actual / predicted;
        log::trace!(
            "iter {} f={f:e} |g|={gnorm:e} delta={delta:e} rho={rho:.4} cg={}",
            report.iterations,
            cg.iterations
        );

        delta = trust_region_update(rho, delta, step_norm, cg.status == CgStatus::BoundaryHit, cfg);
        if rho > cfg.eta0 && actual < 0.0 {
            w = w_new;
            margins = margins_new;
            // keep the recorded objective monotone when the direct
            // difference is below rounding
            f = f_new.min(f);
            g = obj.gradient_at(&w, &margins)?;
            gnorm = norm(&g);
        }
    }

    report.wall_time_seconds = start.elapsed().as_secs_f64();
    report.weights = w;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_policy_points() {
        let cfg = TronConfig::default();
        assert_eq!(trust_region_update(0.9, 1.0, 1.0, false, &cfg), 2.0);
        assert_eq!(trust_region_update(0.9, 1.0, 1.0, true, &cfg), 4.0);
        let mid = trust_region_update(0.5, 1.0, 0.3, false, &cfg);
        assert!((0.25..=0.5).contains(&mid));
        let shrink = trust_region_update(-1.0, 1.0, 0.1, false, &cfg);
        assert!((0.025..=0.5).contains(&shrink));
        assert!(trust_region_update(f64::NAN, 1.0, 0.1, false, &cfg) <= 0.5);
    }

    #[test]
    fn config_validation() {
        assert!(TronConfig::default().validate().is_ok());
        let bad = TronConfig {
            eta1: 0.9,
            ..TronConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TronConfig {
            delta3: 0.9,
            ..TronConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TronConfig {
            xi_policy: XiPolicy::Fixed(1.5),
            ..TronConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn gradient_scaled_forcing_is_capped() {
        assert_eq!(XiPolicy::GradientScaled(1.0).xi(5.0), 0.1);
        assert_eq!(XiPolicy::GradientScaled(1.0).xi(1e-3), 1e-3);
    }
}
