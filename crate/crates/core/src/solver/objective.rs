use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::{LossFamily, LossSpec};
use crate::sparse::HessianOperator;

/// `L(w) = λ‖w‖²/2 + (1/n)Σ ψ(y_i wᵀx_i)`.
#[derive(Debug, Clone)]
pub struct Objective<'a> {
    dataset: &'a Dataset,
    lambda: f64,
    loss: LossSpec,
}

// 5-point Gauss–Legendre nodes and weights on [0, 1].
const GL_NODES: [f64; 5] = [
    0.046_910_077_030_668,
    0.230_765_344_947_158_5,
    0.5,
    0.769_234_655_052_841_5,
    0.953_089_922_969_332,
];
const GL_WEIGHTS: [f64; 5] = [
    0.118_463_442_528_094_5,
    0.239_314_335_249_683_2,
    0.284_444_444_444_444_45,
    0.239_314_335_249_683_2,
    0.118_463_442_528_094_5,
];

impl<'a> Objective<'a> {
    pub fn new(dataset: &'a Dataset, lambda: f64, loss: LossSpec) -> Result<Self> {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and nonnegative, got {lambda}"
            )));
        }
        if loss.family() == LossFamily::LeastSquares && loss.theta() <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "least squares classification needs theta > 0, got {}",
                loss.theta()
            )));
        }
        Ok(Objective { dataset, lambda, loss })
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn loss(&self) -> &LossSpec {
        &self.loss
    }

    pub fn dim(&self) -> usize {
        self.dataset.n_features()
    }

    fn n(&self) -> f64 {
        self.dataset.n_instances() as f64
    }

    pub fn margins(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.dataset.margins(w)
    }

    pub fn value(&self, w: &[f64]) -> Result<f64> {
        let margins = self.margins(w)?;
        Ok(self.value_at(w, &margins))
    }

    pub(crate) fn value_at(&self, w: &[f64], margins: &[f64]) -> f64 {
        let total: f64 = margins.iter().map(|&a| self.loss.eval(a)).sum();
        0.5 * self.lambda * dot(w, w) + total / self.n()
    }

    /// `∇L(w) = λw + (1/n)Σ ψ'(α_i) y_i x_i`.
    pub fn gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        let margins = self.margins(w)?;
        self.gradient_at(w, &margins)
    }

    pub(crate) fn gradient_at(&self, w: &[f64], margins: &[f64]) -> Result<Vec<f64>> {
        let n = self.n();
        let mut coef = Vec::with_capacity(margins.len());
        for (&a, &y) in margins.iter().zip(self.dataset.labels()) {
            coef.push(self.loss.grad(a)? * f64::from(y) / n);
        }
        let mut g = self.dataset.features().transpose_matvec(&coef)?;
        for (gi, wi) in g.iter_mut().zip(w) {
            *gi += self.lambda * wi;
        }
        Ok(g)
    }

    /// `d_i = ψ''(y_i wᵀx_i)`.
    pub fn hessian_diagonal(&self, w: &[f64]) -> Result<Vec<f64>> {
        let margins = self.margins(w)?;
        self.hessian_diagonal_at(&margins)
    }

    pub(crate) fn hessian_diagonal_at(&self, margins: &[f64]) -> Result<Vec<f64>> {
        margins.iter().map(|&a| self.loss.curvature(a)).collect()
    }

    pub fn hessian(&self, w: &[f64]) -> Result<HessianOperator<'a>> {
        let d = self.hessian_diagonal(w)?;
        HessianOperator::new(self.lambda, self.dataset.features(), d)
    }

    /// `L(w + s) - L(w)` as `∫₀¹ ∇L(w + ts)ᵀs dt` by 5-point Gauss–Legendre.
    /// Free of the cancellation that plagues the direct difference once the
    /// change is far below the objective's magnitude.
    pub(crate) fn integrated_change(&self, w: &[f64], margins: &[f64], s: &[f64]) -> Result<f64> {
        let n = self.n();
        let delta = self.margins(s)?;
        let ws = dot(w, s);
        let ss = dot(s, s);
        let mut total = 0.0;
        for (&t, &weight) in GL_NODES.iter().zip(&GL_WEIGHTS) {
            let mut data = 0.0;
            for (&a, &d) in margins.iter().zip(&delta) {
                if d != 0.0 {
                    data += self.loss.grad(a + t * d)? * d;
                }
            }
            total += weight * (self.lambda * (ws + t * ss) + data / n);
        }
        Ok(total)
    }

    /// Upper bound `λ + μ·max_i ‖x_i‖²` on the largest Hessian eigenvalue,
    /// where `μ` bounds `ψ''`. Infinite for unbounded curvature.
    pub fn smoothness_bound(&self) -> f64 {
        let mu = self.curvature_sup();
        let x = self.dataset.features();
        let max_row = (0..x.n_rows()).map(|i| x.row_norm_sq(i)).fold(0.0, f64::max);
        self.lambda + mu * max_row
    }

    /// Power-iteration estimate of `λ + μ·λ_max(XᵀX/n)`, a tighter (but not
    /// guaranteed) Lipschitz constant for the gradient.
    pub fn smoothness_estimate(&self, iterations: usize) -> f64 {
        let mu = self.curvature_sup();
        let x = self.dataset.features();
        let p = x.n_cols();
        let mut v = vec![1.0 / (p as f64).sqrt(); p];
        let mut eig = 0.0;
        for _ in 0..iterations {
            let xv = x.matvec(&v).expect("dimensions agree");
            let mut u = x.transpose_matvec(&xv).expect("dimensions agree");
            let norm = dot(&u, &u).sqrt();
            if norm == 0.0 {
                eig = 0.0;
                break;
            }
            eig = norm / self.n();
            u.iter_mut().for_each(|ui| *ui /= norm);
            v = u;
        }
        self.lambda + mu * eig
    }

    fn curvature_sup(&self) -> f64 {
        match self.loss.family() {
            LossFamily::SquaredHinge => 2.0,
            LossFamily::ShalevGamma => 1.0 / self.loss.gamma(),
            LossFamily::WangKh => 15.0 / (8.0 * self.loss.bandwidth()),
            _ => self
                .loss
                .curvature_bounds()
                .map(|c| c.mu_upper)
                .unwrap_or(f64::INFINITY),
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
