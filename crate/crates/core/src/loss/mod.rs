//! Margin losses `ψ(α)` for linear binary classification.
//!
//! Every σ-parameterised family is an instance of the general smooth convex
//! loss `ψ(α) = Φ_c(v)(θ - α) + φ_c(v)σ`, `v = (θ - α)/σ`. Each family below is
//! evaluated through its own closed form, arranged so the tails do not cancel;
//! [`LossSpec::generator`] exposes the underlying pair for the generic route.
//!
//! The non-smooth and piecewise reference losses (hinge, squared hinge, the
//! γ-smoothed hinge and the bandwidth-smoothed hinge `K_h`) live in the same
//! type so that the solvers and the command line can treat all of them alike.

mod generator;

use std::f64::consts::{FRAC_2_PI, FRAC_PI_2};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use generator::{
    generator_from_loss, generator_from_loss_with_curvature, GeneratorPair, RateInverse, ScalarFn, VALIDATION_GRID,
};

use crate::error::{Error, Result};
use crate::special::{
    gaussian_positive_part, ln_1p_square, normal_cdf, normal_pdf, normal_quantile, sigmoid, softplus, INV_SQRT_2PI,
};

/// Largest exponent passed to `exp` by the exponential family.
pub const EXP_SATURATION: f64 = 708.782_712_893_384 - 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossFamily {
    SmoothHingeG,
    SmoothHingeM,
    Logistic,
    Exponential,
    LeastSquares,
    SmoothAbsolute,
    SmoothReLU,
    Hinge,
    SquaredHinge,
    ShalevGamma,
    WangKh,
    Custom,
}

impl LossFamily {
    pub const ALL_NAMED: [LossFamily; 11] = [
        LossFamily::Hinge,
        LossFamily::SquaredHinge,
        LossFamily::SmoothHingeG,
        LossFamily::SmoothHingeM,
        LossFamily::Logistic,
        LossFamily::Exponential,
        LossFamily::LeastSquares,
        LossFamily::SmoothAbsolute,
        LossFamily::SmoothReLU,
        LossFamily::ShalevGamma,
        LossFamily::WangKh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossFamily::Hinge => "hinge",
            LossFamily::SquaredHinge => "sq-hinge",
            LossFamily::SmoothHingeG => "smooth-hinge-g",
            LossFamily::SmoothHingeM => "smooth-hinge-m",
            LossFamily::Logistic => "logistic",
            LossFamily::Exponential => "exponential",
            LossFamily::LeastSquares => "least-squares",
            LossFamily::SmoothAbsolute => "smooth-abs",
            LossFamily::SmoothReLU => "srelu",
            LossFamily::ShalevGamma => "shalev-gamma",
            LossFamily::WangKh => "wang-kh",
            LossFamily::Custom => "custom",
        }
    }

    /// Whether `σ` enters the loss.
    pub fn uses_sigma(self) -> bool {
        !matches!(
            self,
            LossFamily::Hinge | LossFamily::SquaredHinge | LossFamily::ShalevGamma | LossFamily::WangKh
        )
    }

    pub fn default_theta(self) -> f64 {
        match self {
            LossFamily::Logistic | LossFamily::Exponential | LossFamily::SmoothReLU => 0.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for LossFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LossFamily::ALL_NAMED
            .iter()
            .copied()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown loss family `{s}`")))
    }
}

/// An open interval `(lower, upper)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpenInterval {
    pub lower: f64,
    pub upper: f64,
}

impl OpenInterval {
    pub fn contains(&self, x: f64) -> bool {
        x > self.lower && x < self.upper
    }
}

/// Strong-convexity and smoothness moduli of a loss: `γ ≤ ψ'' ≤ μ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureCertificate {
    pub gamma_lower: f64,
    pub mu_upper: f64,
}

/// A loss family together with its parameters. Immutable once built.
#[derive(Debug, Clone)]
pub struct LossSpec {
    family: LossFamily,
    theta: f64,
    sigma: f64,
    gamma: f64,
    bandwidth: f64,
    abs_scale: f64,
    generator: Option<Arc<GeneratorPair>>,
}

#[derive(Debug, Clone)]
pub struct LossBuilder {
    family: LossFamily,
    theta: Option<f64>,
    sigma: f64,
    gamma: f64,
    bandwidth: f64,
    rescale_absolute: bool,
}

impl LossBuilder {
    pub fn theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn bandwidth(mut self, bandwidth: f64) -> Self {
        self.bandwidth = bandwidth;
        self
    }

    /// Multiplies the smooth absolute loss by `2/π` so that it tends to
    /// `|θ - α|` rather than `(π/2)|θ - α|` as `σ → 0`.
    pub fn rescale_absolute(mut self, on: bool) -> Self {
        self.rescale_absolute = on;
        self
    }

    pub fn build(self) -> Result<LossSpec> {
        let family = self.family;
        if family == LossFamily::Custom {
            return Err(Error::InvalidParameter(
                "custom losses are built with LossSpec::from_generator".into(),
            ));
        }
        let theta = self.theta.unwrap_or_else(|| family.default_theta());
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {theta}")));
        }
        if family.uses_sigma() && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive and finite for {family}, got {}",
                self.sigma
            )));
        }
        if family == LossFamily::ShalevGamma && !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if family == LossFamily::WangKh && !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if family == LossFamily::SmoothAbsolute && theta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "smooth absolute loss needs theta > 0, got {theta}"
            )));
        }
        let abs_scale = if family == LossFamily::SmoothAbsolute && self.rescale_absolute {
            FRAC_2_PI
        } else {
            1.0
        };
        Ok(LossSpec {
            family,
            theta,
            sigma: self.sigma,
            gamma: self.gamma,
            bandwidth: self.bandwidth,
            abs_scale,
            generator: None,
        })
    }
}

// K_h smoothing kernel H(t) and its first two derivatives.
fn kernel_h(t: f64) -> f64 {
    if t <= -1.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let t2 = t * t;
        0.5 + 15.0 / 16.0 * (t - 2.0 / 3.0 * t * t2 + 0.2 * t * t2 * t2)
    }
}

fn kernel_h_deriv(t: f64) -> f64 {
    if t <= -1.0 || t >= 1.0 {
        0.0
    } else {
        let s = 1.0 - t * t;
        15.0 / 16.0 * s * s
    }
}

fn kernel_h_second(t: f64) -> f64 {
    if t <= -1.0 || t >= 1.0 {
        0.0
    } else {
        -15.0 / 4.0 * t * (1.0 - t * t)
    }
}

impl LossSpec {
    pub fn builder(family: LossFamily) -> LossBuilder {
        LossBuilder {
            family,
            theta: None,
            sigma: 1.0,
            gamma: 1.0,
            bandwidth: 1.0,
            rescale_absolute: false,
        }
    }

    pub fn hinge() -> Self {
        Self::builder(LossFamily::Hinge)
            .build()
            .expect("hinge has no parameters to validate")
    }

    pub fn squared_hinge() -> Self {
        Self::builder(LossFamily::SquaredHinge)
            .build()
            .expect("squared hinge has no parameters to validate")
    }

    pub fn smooth_hinge_g(sigma: f64) -> Result<Self> {
        Self::builder(LossFamily::SmoothHingeG).sigma(sigma).build()
    }

    pub fn smooth_hinge_m(sigma: f64) -> Result<Self> {
        Self::builder(LossFamily::SmoothHingeM).sigma(sigma).build()
    }

    pub fn logistic() -> Self {
        Self::builder(LossFamily::Logistic)
            .build()
            .expect("default logistic is valid")
    }

    pub fn exponential() -> Self {
        Self::builder(LossFamily::Exponential)
            .build()
            .expect("default exponential is valid")
    }

    pub fn least_squares() -> Self {
        Self::builder(LossFamily::LeastSquares)
            .build()
            .expect("default least squares is valid")
    }

    /// A loss routed through a user-supplied generator pair, after checking
    /// the pair's identities on [`VALIDATION_GRID`].
    pub fn from_generator(generator: GeneratorPair, theta: f64, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        if !theta.is_finite() {
            return Err(Error::InvalidParameter(format!("theta must be finite, got {theta}")));
        }
        generator.validate()?;
        Ok(LossSpec {
            family: LossFamily::Custom,
            theta,
            sigma,
            gamma: 1.0,
            bandwidth: 1.0,
            abs_scale: 1.0,
            generator: Some(Arc::new(generator)),
        })
    }

    pub fn family(&self) -> LossFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn is_absolute_rescaled(&self) -> bool {
        self.abs_scale != 1.0
    }

    pub fn is_differentiable(&self) -> bool {
        self.family != LossFamily::Hinge
    }

    /// Whether the loss has a nonnegative second derivative everywhere, so a
    /// Newton model built from it is convex. `K_h` is twice differentiable but
    /// its curvature turns negative for `|θ - α| > h/√3`.
    pub fn supports_newton(&self) -> bool {
        !matches!(self.family, LossFamily::Hinge | LossFamily::WangKh)
    }

    #[inline]
    fn scaled(&self, alpha: f64) -> (f64, f64) {
        let u = self.theta - alpha;
        (u, u / self.sigma)
    }

    fn custom(&self) -> &GeneratorPair {
        self.generator
            .as_deref()
            .expect("custom losses always carry a generator")
    }

    /// `ψ(α)`.
    pub fn eval(&self, alpha: f64) -> f64 {
        let (u, v) = self.scaled(alpha);
        let sigma = self.sigma;
        match self.family {
            LossFamily::SmoothHingeG => u.max(0.0) + sigma * gaussian_positive_part(-v.abs()),
            LossFamily::SmoothHingeM => {
                let r = u.hypot(sigma);
                if u >= 0.0 {
                    0.5 * (u + r)
                } else {
                    0.5 * sigma * sigma / (r - u)
                }
            }
            LossFamily::Logistic => sigma * softplus(v),
            LossFamily::Exponential => sigma * saturating_exp(v),
            LossFamily::LeastSquares => 0.5 * u * u,
            LossFamily::SmoothAbsolute => {
                let raw = u * v.atan() - 0.5 * sigma * ln_1p_square(v);
                self.abs_scale * raw.max(0.0)
            }
            LossFamily::SmoothReLU => {
                // reflected Gaussian smoothing of max(0, α - θ)
                (-u).max(0.0) + sigma * gaussian_positive_part(-v.abs())
            }
            LossFamily::Hinge => u.max(0.0),
            LossFamily::SquaredHinge => {
                let m = u.max(0.0);
                m * m
            }
            LossFamily::ShalevGamma => {
                let g = self.gamma;
                if u <= 0.0 {
                    0.0
                } else if u >= g {
                    u - 0.5 * g
                } else {
                    u * u / (2.0 * g)
                }
            }
            LossFamily::WangKh => u * kernel_h(u / self.bandwidth),
            LossFamily::Custom => {
                let gen = self.custom();
                gen.rate(v) * u + gen.companion(v) * sigma
            }
        }
    }

    /// `ψ'(α)`. Fails for the hinge loss.
    pub fn grad(&self, alpha: f64) -> Result<f64> {
        let (u, v) = self.scaled(alpha);
        let d = match self.family {
            LossFamily::SmoothHingeG => -normal_cdf(v),
            LossFamily::SmoothHingeM => -rate_m(v),
            LossFamily::Logistic => -sigmoid(v),
            LossFamily::Exponential => -saturating_exp(v),
            LossFamily::LeastSquares => -u,
            LossFamily::SmoothAbsolute => -self.abs_scale * v.atan(),
            LossFamily::SmoothReLU => normal_cdf(-v),
            LossFamily::Hinge => return Err(Error::NonDifferentiable { family: self.family }),
            LossFamily::SquaredHinge => -2.0 * u.max(0.0),
            LossFamily::ShalevGamma => {
                let g = self.gamma;
                if u <= 0.0 {
                    0.0
                } else if u >= g {
                    -1.0
                } else {
                    -u / g
                }
            }
            LossFamily::WangKh => {
                let t = u / self.bandwidth;
                -(kernel_h(t) + t * kernel_h_deriv(t))
            }
            LossFamily::Custom => -self.custom().rate(v),
        };
        Ok(d)
    }

    /// `ψ''(α)`. Piecewise families return the right-hand value at a
    /// breakpoint, except the γ-smoothed hinge, which keeps its quadratic
    /// branch at `α = θ - γ` and is flat at exactly `α = θ`.
    pub fn curvature(&self, alpha: f64) -> Result<f64> {
        let (u, v) = self.scaled(alpha);
        let sigma = self.sigma;
        let c = match self.family {
            LossFamily::SmoothHingeG | LossFamily::SmoothReLU => normal_pdf(v) / sigma,
            LossFamily::SmoothHingeM => {
                let s = 1.0f64.hypot(v);
                0.5 / (s * s * s * sigma)
            }
            LossFamily::Logistic => sigmoid(v) * sigmoid(-v) / sigma,
            LossFamily::Exponential => saturating_exp(v) / sigma,
            LossFamily::LeastSquares => 1.0,
            LossFamily::SmoothAbsolute => self.abs_scale / (sigma * (1.0 + v * v)),
            LossFamily::Hinge => return Err(Error::NonDifferentiable { family: self.family }),
            LossFamily::SquaredHinge => {
                if u > 0.0 {
                    2.0
                } else {
                    0.0
                }
            }
            LossFamily::ShalevGamma => {
                if u > 0.0 && u <= self.gamma {
                    1.0 / self.gamma
                } else {
                    0.0
                }
            }
            LossFamily::WangKh => {
                let h = self.bandwidth;
                let t = u / h;
                (2.0 * kernel_h_deriv(t) + t * kernel_h_second(t)) / h
            }
            LossFamily::Custom => self.custom().rate_deriv(v) / sigma,
        };
        Ok(c)
    }

    /// The set `-R(Φ_c)` on which the conjugate is finite.
    pub fn conjugate_domain(&self) -> Result<OpenInterval> {
        let unit = OpenInterval {
            lower: -1.0,
            upper: 0.0,
        };
        let interval = match self.family {
            LossFamily::SmoothHingeG | LossFamily::SmoothHingeM | LossFamily::Logistic => unit,
            LossFamily::Exponential => OpenInterval {
                lower: f64::NEG_INFINITY,
                upper: 0.0,
            },
            LossFamily::LeastSquares => OpenInterval {
                lower: f64::NEG_INFINITY,
                upper: f64::INFINITY,
            },
            LossFamily::SmoothAbsolute => OpenInterval {
                lower: -self.abs_scale * FRAC_PI_2,
                upper: self.abs_scale * FRAC_PI_2,
            },
            LossFamily::SmoothReLU => OpenInterval { lower: 0.0, upper: 1.0 },
            LossFamily::Custom => match self.custom().rate_range() {
                Some((lo, hi)) => OpenInterval { lower: -hi, upper: -lo },
                None => {
                    return Err(Error::Unsupported {
                        op: "conjugate without a rate inverse",
                        family: self.family,
                    })
                }
            },
            LossFamily::Hinge | LossFamily::SquaredHinge | LossFamily::ShalevGamma | LossFamily::WangKh => {
                return Err(Error::Unsupported {
                    op: "conjugate",
                    family: self.family,
                })
            }
        };
        Ok(interval)
    }

    /// Fenchel conjugate `ψ*(β) = βθ - σ·φ_c(Φ_c⁻¹(-β))`.
    pub fn conjugate(&self, beta: f64) -> Result<f64> {
        let domain = self.conjugate_domain()?;
        if !domain.contains(beta) {
            return Err(Error::OutOfDomain {
                value: beta,
                lower: domain.lower,
                upper: domain.upper,
            });
        }
        let (theta, sigma) = (self.theta, self.sigma);
        let value = match self.family {
            LossFamily::SmoothHingeG => {
                let v = gaussian_rate_inverse(-beta, 1.0 + beta);
                beta * theta - sigma * normal_pdf(v)
            }
            LossFamily::SmoothHingeM => beta * theta - sigma * (-beta * (1.0 + beta)).sqrt(),
            LossFamily::Logistic => {
                let q = -beta;
                let p = 1.0 + beta;
                beta * theta + sigma * (p * p.ln() + q * q.ln())
            }
            LossFamily::Exponential => beta * theta + sigma * beta * (1.0 - (-beta).ln()),
            LossFamily::LeastSquares => beta * theta + 0.5 * beta * beta,
            LossFamily::SmoothAbsolute => {
                let c = self.abs_scale;
                beta * theta - c * sigma * (beta / c).cos().ln()
            }
            LossFamily::SmoothReLU => {
                let v = gaussian_rate_inverse(beta, 1.0 - beta);
                beta * theta - sigma * normal_pdf(v)
            }
            LossFamily::Custom => {
                let gen = self.custom();
                let v = gen.invert_rate(-beta)?;
                beta * theta - sigma * gen.companion(v)
            }
            _ => unreachable!("conjugate_domain rejects the remaining families"),
        };
        Ok(value)
    }

    /// Uniform bound on `ψ(α) - max(0, 1 - α)` for the two smooth hinge losses.
    pub fn hinge_gap_bound(&self) -> Result<f64> {
        match self.family {
            LossFamily::SmoothHingeG if self.theta == 1.0 => Ok(self.sigma * INV_SQRT_2PI),
            LossFamily::SmoothHingeM if self.theta == 1.0 => Ok(0.5 * self.sigma),
            _ => Err(Error::Unsupported {
                op: "hinge gap bound (needs a smooth hinge with theta = 1)",
                family: self.family,
            }),
        }
    }

    /// `inf ψ''` and `sup ψ''` over the real line.
    pub fn curvature_bounds(&self) -> Result<CurvatureCertificate> {
        let sigma = self.sigma;
        let (gamma_lower, mu_upper) = match self.family {
            LossFamily::SmoothHingeG | LossFamily::SmoothReLU => (0.0, INV_SQRT_2PI / sigma),
            LossFamily::SmoothHingeM => (0.0, 0.5 / sigma),
            LossFamily::Logistic => (0.0, 0.25 / sigma),
            LossFamily::Exponential => (0.0, f64::INFINITY),
            LossFamily::LeastSquares => (1.0, 1.0),
            LossFamily::SmoothAbsolute => (0.0, self.abs_scale / sigma),
            LossFamily::Custom => numeric_rate_deriv_bounds(self.custom(), sigma),
            LossFamily::Hinge | LossFamily::SquaredHinge | LossFamily::ShalevGamma | LossFamily::WangKh => {
                return Err(Error::Unsupported {
                    op: "curvature bounds",
                    family: self.family,
                })
            }
        };
        Ok(CurvatureCertificate { gamma_lower, mu_upper })
    }

    /// Classification calibration for a convex margin loss: `ψ'(0) < 0`.
    pub fn is_calibrated(&self) -> Result<bool> {
        Ok(self.grad(0.0)? < 0.0)
    }

    /// The generator pair behind a framework family, with its closed-form
    /// rate inverse. `None` for families outside the framework.
    pub fn generator(&self) -> Option<GeneratorPair> {
        let sigma = self.sigma;
        let c = self.abs_scale;
        let gen = match self.family {
            LossFamily::SmoothHingeG => {
                GeneratorPair::new(normal_cdf, normal_pdf, normal_pdf).with_inverse(normal_quantile, (0.0, 1.0))
            }
            LossFamily::SmoothHingeM => GeneratorPair::new(
                rate_m,
                |v: f64| 0.5 / 1.0f64.hypot(v),
                |v: f64| {
                    let s = 1.0f64.hypot(v);
                    0.5 / (s * s * s)
                },
            )
            .with_inverse(
                |q: f64| {
                    let t = 2.0 * q - 1.0;
                    t / (1.0 - t * t).sqrt()
                },
                (0.0, 1.0),
            ),
            LossFamily::Logistic => GeneratorPair::new(
                sigmoid,
                |v: f64| softplus(v) - v * sigmoid(v),
                |v: f64| sigmoid(v) * sigmoid(-v),
            )
            .with_inverse(|q: f64| (q / (1.0 - q)).ln(), (0.0, 1.0)),
            LossFamily::Exponential => GeneratorPair::new(f64::exp, |v: f64| (1.0 - v) * v.exp(), f64::exp)
                .with_inverse(f64::ln, (0.0, f64::INFINITY)),
            LossFamily::LeastSquares => {
                GeneratorPair::new(move |v| sigma * v, move |v| -0.5 * sigma * v * v, move |_| sigma)
                    .with_inverse(move |q| q / sigma, (f64::NEG_INFINITY, f64::INFINITY))
            }
            LossFamily::SmoothAbsolute => GeneratorPair::new(
                move |v: f64| c * v.atan(),
                move |v: f64| -0.5 * c * ln_1p_square(v),
                move |v: f64| c / (1.0 + v * v),
            )
            .with_inverse(move |q: f64| (q / c).tan(), (-c * FRAC_PI_2, c * FRAC_PI_2)),
            LossFamily::Custom => self.custom().clone(),
            _ => return None,
        };
        Some(gen)
    }
}

/// `Φ_M(v) = (1 + v/√(1+v²))/2`, rewritten for `v < 0` so it does not cancel.
fn rate_m(v: f64) -> f64 {
    let s = 1.0f64.hypot(v);
    if v >= 0.0 {
        0.5 * (1.0 + v / s)
    } else {
        0.5 / (s * (s - v))
    }
}

fn saturating_exp(v: f64) -> f64 {
    if v > EXP_SATURATION {
        log::debug!("exponential loss saturated at v = {v}");
        EXP_SATURATION.exp()
    } else {
        v.exp()
    }
}

/// `Φ⁻¹(p)` given both `p` and `1 - p`, using whichever is accurate.
fn gaussian_rate_inverse(p: f64, complement: f64) -> f64 {
    if p <= 0.5 {
        normal_quantile(p)
    } else {
        -normal_quantile(complement)
    }
}

/// Grid used to bound `Φ_c'` for custom generators: 4001 points on
/// `[-20, 20]`, golden-section refinement around the extreme grid points,
/// plus far-tail probes at `±1e3` and `±1e6`.
const BOUND_GRID: (f64, f64, usize) = (-20.0, 20.0, 4001);

fn numeric_rate_deriv_bounds(gen: &GeneratorPair, sigma: f64) -> (f64, f64) {
    let (lo, hi, count) = BOUND_GRID;
    let step = (hi - lo) / (count - 1) as f64;
    let f = |v: f64| gen.rate_deriv(v);
    let (mut arg_min, mut arg_max) = (lo, lo);
    let (mut min, mut max) = (f(lo), f(lo));
    for k in 1..count {
        let v = lo + step * k as f64;
        let d = f(v);
        if d < min {
            min = d;
            arg_min = v;
        }
        if d > max {
            max = d;
            arg_max = v;
        }
    }
    max = max.max(golden_extreme(&|v| -f(v), arg_max - step, arg_max + step).abs());
    min = min.min(golden_extreme(&f, arg_min - step, arg_min + step));
    for &tail in &[-1e6, -1e3, 1e3, 1e6] {
        let d = f(tail);
        if d.is_finite() {
            max = max.max(d);
            min = min.min(d);
        } else {
            max = f64::INFINITY;
        }
    }
    // growth still under way at the grid edge means no finite supremum
    let edge_growth = f(1e6) > f(1e3) * 1.5 || f(-1e6) > f(-1e3) * 1.5;
    let mu = if edge_growth { f64::INFINITY } else { max / sigma };
    ((min / sigma).max(0.0), mu)
}

/// Minimum value of `f` on `[a, b]` by golden-section search.
fn golden_extreme(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    for _ in 0..100 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - r * (b - a);
        d = a + r * (b - a);
        if (b - a).abs() < 1e-12 {
            break;
        }
    }
    f(0.5 * (a + b))
}
