//! Generator pairs `(Φ_c, φ_c)` and the smooth convex losses they induce.
//!
//! A pair satisfying `Φ_c'(v)·v + φ_c'(v) = 0` and `Φ_c' ≥ 0` defines the loss
//! `ψ(α) = Φ_c(v)(θ - α) + φ_c(v)σ` with `v = (θ - α)/σ`, whose derivative is
//! `-Φ_c(v)` and whose curvature is `Φ_c'(v)/σ`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// How `Φ_c⁻¹` is obtained when a conjugate is requested.
#[derive(Clone)]
pub enum RateInverse {
    /// No inverse; the conjugate is unavailable.
    None,
    /// Closed-form inverse, valid on the open interval `range` of `Φ_c`.
    Closed { inverse: ScalarFn, range: (f64, f64) },
    /// Numerical inversion by bisection + Newton on `[lo, hi]` in `v`.
    Bracket { lo: f64, hi: f64 },
}

/// The functions `Φ_c` (the rate), `φ_c` (its companion) and `Φ_c'`.
#[derive(Clone)]
pub struct GeneratorPair {
    rate: ScalarFn,
    companion: ScalarFn,
    rate_deriv: ScalarFn,
    inverse: RateInverse,
}

impl fmt::Debug for GeneratorPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inverse = match self.inverse {
            RateInverse::None => "none".to_string(),
            RateInverse::Closed { range, .. } => format!("closed on {range:?}"),
            RateInverse::Bracket { lo, hi } => format!("bracket [{lo}, {hi}]"),
        };
        f.debug_struct("GeneratorPair")
            .field("inverse", &inverse)
            .finish_non_exhaustive()
    }
}

/// Grid on which generator identities are checked.
pub const VALIDATION_GRID: (f64, f64, usize) = (-8.0, 8.0, 65);
const VALIDATION_TOL: f64 = 1e-8;
const FD_STEP: f64 = 1e-3;

fn five_point_derivative(f: &dyn Fn(f64) -> f64, v: f64) -> f64 {
    let h = FD_STEP;
    (f(v - 2.0 * h) - 8.0 * f(v - h) + 8.0 * f(v + h) - f(v + 2.0 * h)) / (12.0 * h)
}

impl GeneratorPair {
    pub fn new<R, C, D>(rate: R, companion: C, rate_deriv: D) -> Self
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
        C: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        GeneratorPair {
            rate: Arc::new(rate),
            companion: Arc::new(companion),
            rate_deriv: Arc::new(rate_deriv),
            inverse: RateInverse::None,
        }
    }

    /// Supplies a closed-form `Φ_c⁻¹` valid on the open range `(lo, hi)` of `Φ_c`.
    pub fn with_inverse<I>(mut self, inverse: I, range: (f64, f64)) -> Self
    where
        I: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.inverse = RateInverse::Closed {
            inverse: Arc::new(inverse),
            range,
        };
        self
    }

    /// Enables numerical inversion of `Φ_c` on `[lo, hi]`.
    pub fn with_bracket(mut self, lo: f64, hi: f64) -> Self {
        self.inverse = RateInverse::Bracket { lo, hi };
        self
    }

    #[inline]
    pub fn rate(&self, v: f64) -> f64 {
        (self.rate)(v)
    }

    #[inline]
    pub fn companion(&self, v: f64) -> f64 {
        (self.companion)(v)
    }

    #[inline]
    pub fn rate_deriv(&self, v: f64) -> f64 {
        (self.rate_deriv)(v)
    }

    pub fn inverse(&self) -> &RateInverse {
        &self.inverse
    }

    /// Checks `Φ_c'v + φ_c' = 0`, `Φ_c' ≥ 0` and that the supplied `Φ_c'`
    /// agrees with a finite difference of `Φ_c`, all on [`VALIDATION_GRID`].
    pub fn validate(&self) -> Result<()> {
        let (lo, hi, count) = VALIDATION_GRID;
        let step = (hi - lo) / (count - 1) as f64;
        let companion = |v: f64| self.companion(v);
        let rate = |v: f64| self.rate(v);
        for k in 0..count {
            let v = lo + step * k as f64;
            let r = self.rate(v);
            let c = self.companion(v);
            let dr = self.rate_deriv(v);
            if !(r.is_finite() && c.is_finite() && dr.is_finite()) {
                return Err(Error::InvalidGenerator(format!("non-finite value at v = {v}")));
            }
            if dr < -1e-12 {
                return Err(Error::InvalidGenerator(format!(
                    "rate is decreasing at v = {v} (derivative {dr:e})"
                )));
            }
            let dc = five_point_derivative(&companion, v);
            let identity = dr * v + dc;
            let scale = 1.0 + c.abs() + (dr * v).abs();
            if identity.abs() > VALIDATION_TOL * scale {
                return Err(Error::InvalidGenerator(format!(
                    "rate'(v)·v + companion'(v) = {identity:e} at v = {v}"
                )));
            }
            let dr_fd = five_point_derivative(&rate, v);
            if (dr_fd - dr).abs() > VALIDATION_TOL * (1.0 + r.abs() + dr.abs()) {
                return Err(Error::InvalidGenerator(format!(
                    "supplied rate derivative {dr:e} disagrees with finite difference {dr_fd:e} at v = {v}"
                )));
            }
        }
        Ok(())
    }

    /// Open interval containing the values `Φ_c` can take, when known.
    pub fn rate_range(&self) -> Option<(f64, f64)> {
        match self.inverse {
            RateInverse::None => None,
            RateInverse::Closed { range, .. } => Some(range),
            RateInverse::Bracket { lo, hi } => Some((self.rate(lo), self.rate(hi))),
        }
    }

    /// Solves `Φ_c(v) = q`.
    pub fn invert_rate(&self, q: f64) -> Result<f64> {
        match &self.inverse {
            RateInverse::None => Err(Error::InvalidGenerator(
                "no inverse or bracket supplied for the rate".into(),
            )),
            RateInverse::Closed { inverse, range } => {
                if q > range.0 && q < range.1 {
                    Ok(inverse(q))
                } else {
                    Err(Error::OutOfDomain {
                        value: q,
                        lower: range.0,
                        upper: range.1,
                    })
                }
            }
            RateInverse::Bracket { lo, hi } => self.bracketed_inverse(q, *lo, *hi),
        }
    }

    fn bracketed_inverse(&self, q: f64, lo: f64, hi: f64) -> Result<f64> {
        let (mut a, mut b) = (lo, hi);
        let (fa, fb) = (self.rate(a) - q, self.rate(b) - q);
        if fa > 0.0 || fb < 0.0 {
            return Err(Error::OutOfDomain {
                value: q,
                lower: self.rate(lo),
                upper: self.rate(hi),
            });
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if self.rate(mid) - q > 0.0 {
                b = mid;
            } else {
                a = mid;
            }
            if b - a <= 1e-10 * (1.0 + a.abs()) {
                break;
            }
        }
        let mut v = 0.5 * (a + b);
        for _ in 0..3 {
            let d = self.rate_deriv(v);
            if d <= 0.0 {
                break;
            }
            let next = v - (self.rate(v) - q) / d;
            if !(next >= a && next <= b) {
                break;
            }
            v = next;
        }
        Ok(v)
    }
}

/// Recovers the generator pair of an arbitrary smooth convex loss:
/// `Φ_c(v) = -ψ'(θ - σv)` and `φ_c(v) = ψ(θ - σv)/σ - Φ_c(v)·v`.
///
/// `Φ_c'` is approximated by a central difference of `ψ'`; use
/// [`generator_from_loss_with_curvature`] when `ψ''` is available.
pub fn generator_from_loss<P, G>(psi: P, psi_deriv: G, theta: f64, sigma: f64) -> GeneratorPair
where
    P: Fn(f64) -> f64 + Send + Sync + 'static,
    G: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let psi_deriv = Arc::new(psi_deriv);
    let dd = Arc::clone(&psi_deriv);
    let curvature = move |alpha: f64| {
        let h = 1e-5 * (1.0 + alpha.abs());
        (dd(alpha + h) - dd(alpha - h)) / (2.0 * h)
    };
    build_from_loss(psi, move |a| psi_deriv(a), curvature, theta, sigma)
}

/// As [`generator_from_loss`], with an exact second derivative.
pub fn generator_from_loss_with_curvature<P, G, H>(
    psi: P,
    psi_deriv: G,
    psi_curvature: H,
    theta: f64,
    sigma: f64,
) -> GeneratorPair
where
    P: Fn(f64) -> f64 + Send + Sync + 'static,
    G: Fn(f64) -> f64 + Send + Sync + 'static,
    H: Fn(f64) -> f64 + Send + Sync + 'static,
{
    build_from_loss(psi, psi_deriv, psi_curvature, theta, sigma)
}

fn build_from_loss<P, G, H>(psi: P, psi_deriv: G, psi_curvature: H, theta: f64, sigma: f64) -> GeneratorPair
where
    P: Fn(f64) -> f64 + Send + Sync + 'static,
    G: Fn(f64) -> f64 + Send + Sync + 'static,
    H: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let psi_deriv = Arc::new(psi_deriv);
    let rate_deriv_fn = Arc::clone(&psi_deriv);
    let rate = move |v: f64| -rate_deriv_fn(theta - sigma * v);
    let companion = move |v: f64| {
        let alpha = theta - sigma * v;
        psi(alpha) / sigma + psi_deriv(alpha) * v
    };
    // d/dv[-ψ'(θ - σv)] = σψ''(θ - σv)
    let rate_deriv = move |v: f64| sigma * psi_curvature(theta - sigma * v);
    GeneratorPair::new(rate, companion, rate_deriv)
}
