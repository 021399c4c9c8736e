use serde::Serialize;

use super::objective::{dot, norm};
use crate::error::{Error, Result};
use crate::sparse::HessianOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CgStatus {
    /// `‖Hs + g‖ ≤ ξ‖g‖`.
    ResidualConverged,
    /// The step was clipped to the trust-region boundary.
    BoundaryHit,
    /// Iteration cap reached; the step is usable but truncated.
    IterCap,
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub step: Vec<f64>,
    pub status: CgStatus,
    /// Hessian-vector products performed.
    pub iterations: usize,
}

/// Truncated conjugate gradient for `min gᵀs + ½sᵀHs` subject to `‖s‖ ≤ Δ`.
pub fn cg_subproblem(g: &[f64], h: &HessianOperator<'_>, delta: f64, xi: f64, max_iters: usize) -> Result<CgOutcome> {
    if g.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: g.len(),
        });
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "trust radius must be positive, got {delta}"
        )));
    }
    let p_dim = g.len();
    let tol = xi * norm(g);
    let mut s = vec![0.0; p_dim];
    let mut r: Vec<f64> = g.iter().map(|x| -x).collect();
    let mut d = r.clone();
    let mut hd = vec![0.0; p_dim];
    let mut scratch = vec![0.0; h.matrix().n_rows()];
    let mut rr = dot(&r, &r);
    let delta_sq = delta * delta;

    for k in 0..max_iters {
        if rr.sqrt() <= tol {
            return Ok(CgOutcome {
                step: s,
                status: CgStatus::ResidualConverged,
                iterations: k,
            });
        }
        h.apply_into(&d, &mut scratch, &mut hd)?;
        let dhd = dot(&d, &hd);
        if !(dhd > 0.0) {
            return Err(Error::NumericalBreakdown(format!(
                "nonpositive curvature pᵀHp = {dhd:e} in conjugate gradient"
            )));
        }
        let alpha = rr / dhd;
        let trial_sq: f64 = s
            .iter()
            .zip(&d)
            .map(|(si, di)| {
                let t = si + alpha * di;
                t * t
            })
            .sum();
        if trial_sq > delta_sq {
            let tau = boundary_fraction(&s, &d, delta);
            for (si, di) in s.iter_mut().zip(&d) {
                *si += tau * di;
            }
            return Ok(CgOutcome {
                step: s,
                status: CgStatus::BoundaryHit,
                iterations: k + 1,
            });
        }
        for i in 0..p_dim {
            s[i] += alpha * d[i];
            r[i] -= alpha * hd[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        for (di, ri) in d.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
        rr = rr_new;
    }
    let status = if rr.sqrt() <= tol {
        CgStatus::ResidualConverged
    } else {
        CgStatus::IterCap
    };
    Ok(CgOutcome {
        step: s,
        status,
        iterations: max_iters,
    })
}

/// The `τ ≥ 0` with `‖s + τp‖ = Δ`, for `‖s‖ ≤ Δ`.
pub fn boundary_fraction(s: &[f64], p: &[f64], delta: f64) -> f64 {
    let sp = dot(s, p);
    let pp = dot(p, p);
    let room = (delta * delta - dot(s, s)).max(0.0);
    let rad = (sp * sp + pp * room).sqrt();
    if sp <= 0.0 {
        (rad - sp) / pp
    } else {
        // same root, rationalised to avoid cancellation when sᵀp > 0
        room / (sp + rad)
    }
}
