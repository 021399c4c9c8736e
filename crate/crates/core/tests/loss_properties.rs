use proptest::prelude::*;
use smoothsvm::loss::{LossFamily, LossSpec};

const SIGMAS: [f64; 3] = [0.25, 1.0, 2.0];

fn hinge(a: f64) -> f64 {
    (1.0 - a).max(0.0)
}

fn differentiable_families(sigma: f64) -> Vec<LossSpec> {
    let b = |f| LossSpec::builder(f).sigma(sigma);
    vec![
        b(LossFamily::SmoothHingeG).build().unwrap(),
        b(LossFamily::SmoothHingeM).build().unwrap(),
        b(LossFamily::Logistic).build().unwrap(),
        b(LossFamily::Exponential).build().unwrap(),
        b(LossFamily::LeastSquares).build().unwrap(),
        b(LossFamily::SmoothAbsolute).build().unwrap(),
        b(LossFamily::SmoothAbsolute).rescale_absolute(true).build().unwrap(),
        b(LossFamily::SmoothReLU).build().unwrap(),
        b(LossFamily::SquaredHinge).build().unwrap(),
        b(LossFamily::ShalevGamma).gamma(sigma).build().unwrap(),
        b(LossFamily::WangKh).bandwidth(sigma).build().unwrap(),
    ]
}

/// Points where a piecewise family's derivatives jump.
fn breakpoints(l: &LossSpec) -> Vec<f64> {
    let t = l.theta();
    match l.family() {
        LossFamily::SquaredHinge => vec![t],
        LossFamily::ShalevGamma => vec![t, t - l.gamma()],
        LossFamily::WangKh => vec![t - l.bandwidth(), t + l.bandwidth()],
        _ => vec![],
    }
}

/// Relative difference with a floor on the denominator, so values that are
/// themselves at rounding level do not inflate the ratio.
fn rel_err(analytic: f64, fd: f64) -> f64 {
    (analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-2)
}

#[test]
fn derivatives_match_central_differences() {
    let h = 1e-6;
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for &sigma in &SIGMAS {
        for l in differentiable_families(sigma) {
            let breaks = breakpoints(&l);
            for k in 0..=400 {
                let v = -6.0 + 12.0 * k as f64 / 400.0;
                let a = l.theta() - l.sigma().max(0.25) * v;
                if breaks.iter().any(|b| (a - b).abs() < 1e-4) {
                    continue;
                }
                let fd1 = (l.eval(a + h) - l.eval(a - h)) / (2.0 * h);
                let fd2 = (l.grad(a + h).unwrap() - l.grad(a - h).unwrap()) / (2.0 * h);
                let e1 = rel_err(l.grad(a).unwrap(), fd1);
                let e2 = rel_err(l.curvature(a).unwrap(), fd2);
                assert!(e1 <= 1e-6, "{:?} grad at {a}: {e1:e}", l.family());
                assert!(e2 <= 1e-6, "{:?} curvature at {a}: {e2:e}", l.family());
                worst = worst.max(e1).max(e2);
                checked += 1;
            }
        }
    }
    assert!(checked >= 10_000, "{checked}");
    assert!(worst <= 1e-6);
}

#[test]
fn smooth_hinges_bracket_the_hinge() {
    for &sigma in &[1.0, 0.125, 1.0 / 64.0] {
        let g = LossSpec::smooth_hinge_g(sigma).unwrap();
        let m = LossSpec::smooth_hinge_m(sigma).unwrap();
        let (bg, bm) = (g.hinge_gap_bound().unwrap(), m.hinge_gap_bound().unwrap());
        for k in 0..=20_000 {
            let a = -10.0 + k as f64 * 1e-3;
            let dg = g.eval(a) - hinge(a);
            let dm = m.eval(a) - hinge(a);
            assert!(dg >= 0.0 && dg <= bg + 1e-12, "G sigma={sigma} a={a} gap={dg}");
            assert!(dm >= 0.0 && dm <= bm + 1e-12, "M sigma={sigma} a={a} gap={dm}");
        }
    }
}

#[test]
fn convex_families_have_nonnegative_curvature() {
    for &sigma in &SIGMAS {
        for l in differentiable_families(sigma) {
            if l.family() == LossFamily::WangKh {
                continue;
            }
            let mut prev = f64::NEG_INFINITY;
            for k in 0..=2000 {
                let a = -20.0 + k as f64 * 0.02;
                assert!(l.curvature(a).unwrap() >= 0.0, "{:?} at {a}", l.family());
                let g = l.grad(a).unwrap();
                assert!(g >= prev, "{:?} grad decreases at {a}", l.family());
                prev = g;
            }
        }
    }
}

#[test]
fn smooth_hinge_rates_are_probabilities() {
    for &sigma in &SIGMAS {
        for fam in [LossFamily::SmoothHingeG, LossFamily::SmoothHingeM, LossFamily::Logistic] {
            let l = LossSpec::builder(fam).sigma(sigma).build().unwrap();
            for k in 0..=400 {
                let v = -20.0 + k as f64 * 0.1;
                let d = l.grad(l.theta() - sigma * v).unwrap();
                // strictly inside where f64 can represent the gap to 0 and 1
                if v.abs() <= 8.0 {
                    assert!(d > -1.0 && d < 0.0, "{fam} at v={v}: {d}");
                } else {
                    assert!((-1.0..=0.0).contains(&d), "{fam} at v={v}: {d}");
                }
            }
        }
    }
}

#[test]
fn default_margin_losses_are_calibrated() {
    for fam in [
        LossFamily::SmoothHingeG,
        LossFamily::SmoothHingeM,
        LossFamily::Logistic,
        LossFamily::Exponential,
    ] {
        assert!(
            LossSpec::builder(fam).build().unwrap().is_calibrated().unwrap(),
            "{fam}"
        );
    }
}

#[test]
fn smooth_relu_tracks_relu() {
    for &sigma in &[1.0, 0.25, 0.01] {
        let l = LossSpec::builder(LossFamily::SmoothReLU).sigma(sigma).build().unwrap();
        let bound = sigma / (2.0 * std::f64::consts::PI).sqrt();
        for k in 0..=10_000 {
            let a = -5.0 + k as f64 * 1e-3;
            let gap = (l.eval(a) - a.max(0.0)).abs();
            assert!(gap <= bound + 1e-15, "sigma={sigma} a={a}");
        }
    }
}

#[test]
fn builtin_generators_reproduce_their_family() {
    for &sigma in &SIGMAS {
        for l in differentiable_families(sigma) {
            let Some(gen) = l.generator() else { continue };
            gen.validate().unwrap_or_else(|e| panic!("{:?}: {e}", l.family()));
            let custom = LossSpec::from_generator(gen, l.theta(), l.sigma()).unwrap();
            for k in 0..=200 {
                let a = l.theta() + sigma * (-5.0 + k as f64 * 0.05);
                let (x, y) = (custom.eval(a), l.eval(a));
                assert!(
                    (x - y).abs() <= 1e-12 * (1.0 + y.abs()),
                    "{:?} at {a}: {x} vs {y}",
                    l.family()
                );
                let (gx, gy) = (custom.grad(a).unwrap(), l.grad(a).unwrap());
                assert!((gx - gy).abs() <= 1e-12 * (1.0 + gy.abs()));
            }
        }
    }
}

#[test]
fn numerical_curvature_bounds_agree_with_closed_forms() {
    for &sigma in &SIGMAS {
        for fam in [
            LossFamily::SmoothHingeG,
            LossFamily::Logistic,
            LossFamily::SmoothAbsolute,
            LossFamily::LeastSquares,
        ] {
            let l = LossSpec::builder(fam).sigma(sigma).build().unwrap();
            let closed = l.curvature_bounds().unwrap();
            let custom = LossSpec::from_generator(l.generator().unwrap(), l.theta(), sigma).unwrap();
            let numeric = custom.curvature_bounds().unwrap();
            assert!(
                (closed.mu_upper - numeric.mu_upper).abs() <= 1e-9 * closed.mu_upper,
                "{fam}"
            );
            assert!((closed.gamma_lower - numeric.gamma_lower).abs() <= 1e-6, "{fam}");
            assert!(numeric.gamma_lower <= numeric.mu_upper);
        }
    }
}

proptest! {
    #[test]
    fn fenchel_young_inequality(sigma in 0.05f64..4.0, alpha in -30.0f64..30.0, t in 0.001f64..0.999) {
        for fam in [LossFamily::SmoothHingeG, LossFamily::SmoothHingeM, LossFamily::Logistic] {
            let l = LossSpec::builder(fam).sigma(sigma).build().unwrap();
            let beta = -t;
            let lhs = l.eval(alpha) + l.conjugate(beta).unwrap();
            prop_assert!(lhs >= alpha * beta - 1e-10 * (1.0 + (alpha * beta).abs()));
        }
    }

    #[test]
    fn conjugate_equality_at_gradient(sigma in 0.05f64..4.0, v in -5.0f64..5.0) {
        for fam in [
            LossFamily::SmoothHingeG,
            LossFamily::SmoothHingeM,
            LossFamily::Logistic,
            LossFamily::Exponential,
            LossFamily::LeastSquares,
            LossFamily::SmoothAbsolute,
            LossFamily::SmoothReLU,
        ] {
            let l = LossSpec::builder(fam).sigma(sigma).build().unwrap();
            let alpha = l.theta() - sigma * v;
            let beta = l.grad(alpha).unwrap();
            let lhs = l.eval(alpha) + l.conjugate(beta).unwrap();
            let rhs = alpha * beta;
            prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + rhs.abs()), "{} {} vs {}", fam, lhs, rhs);
        }
    }

    #[test]
    fn losses_are_nonnegative(sigma in 0.01f64..10.0, alpha in -1e3f64..1e3) {
        for fam in [
            LossFamily::SmoothHingeG,
            LossFamily::SmoothHingeM,
            LossFamily::Logistic,
            LossFamily::Exponential,
            LossFamily::SmoothAbsolute,
            LossFamily::SmoothReLU,
        ] {
            let l = LossSpec::builder(fam).sigma(sigma).build().unwrap();
            prop_assert!(l.eval(alpha) >= 0.0);
        }
    }
}
