//! Scalar special functions used by the loss families.
//!
//! The standard normal CDF is evaluated through `erfc` so that both tails keep
//! full relative precision; `(1 + erf(v/√2))/2` loses every digit below about
//! `Φ(v) < 1e-16`.

use std::f64::consts::FRAC_1_SQRT_2;

/// `1/√(2π)`, the standard normal density at zero.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

pub fn normal_pdf(v: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * v * v).exp()
}

pub fn normal_cdf(v: f64) -> f64 {
    0.5 * libm::erfc(-v * FRAC_1_SQRT_2)
}

/// `u·Φ(u) + φ(u)`, the expected positive part `E[max(0, u + Z)]` for a
/// standard normal `Z`. Always positive; evaluated on the branch that avoids
/// subtracting nearly equal quantities.
pub fn gaussian_positive_part(u: f64) -> f64 {
    if u <= 0.0 {
        (u * normal_cdf(u) + normal_pdf(u)).max(0.0)
    } else {
        // g(u) = u + g(-u)
        u + (-u * normal_cdf(-u) + normal_pdf(u)).max(0.0)
    }
}

// Acklam's rational approximation, relative error about 1.15e-9 before
// refinement.
const QA: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const QB: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const QC: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const QD: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn quantile_initial(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((QC[0] * q + QC[1]) * q + QC[2]) * q + QC[3]) * q + QC[4]) * q + QC[5])
            / ((((QD[0] * q + QD[1]) * q + QD[2]) * q + QD[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((QA[0] * r + QA[1]) * r + QA[2]) * r + QA[3]) * r + QA[4]) * r + QA[5]) * q
            / (((((QB[0] * r + QB[1]) * r + QB[2]) * r + QB[3]) * r + QB[4]) * r + 1.0)
    }
}

/// Inverse of the standard normal CDF for `p` in `(0, 1)`.
///
/// Values above one half are mapped through the symmetry `Φ⁻¹(p) = -Φ⁻¹(1-p)`;
/// callers that hold `1 - p` more accurately than `p` should call this with
/// the complement and negate.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || p <= 0.0 || p >= 1.0 {
        return if p == 0.0 {
            f64::NEG_INFINITY
        } else if p == 1.0 {
            f64::INFINITY
        } else {
            f64::NAN
        };
    }
    if p > 0.5 {
        return -normal_quantile(1.0 - p);
    }
    let mut x = quantile_initial(p);
    // Halley refinement on Φ(x) - p; the lower tail is where erfc is exact.
    for _ in 0..4 {
        let e = normal_cdf(x) - p;
        let u = e / normal_pdf(x);
        let dx = u / (1.0 + 0.5 * x * u);
        x -= dx;
        if dx.abs() <= 1e-15 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// `ln(1 + e^v)` without overflow for large `v` or loss of precision for
/// very negative `v`.
pub fn softplus(v: f64) -> f64 {
    v.max(0.0) + (-v.abs()).exp().ln_1p()
}

pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + v²)` that stays finite once `v²` would overflow.
pub fn ln_1p_square(v: f64) -> f64 {
    let a = v.abs();
    if a > 1e150 {
        2.0 * a.ln() + (1.0 / (a * a)).ln_1p()
    } else {
        (a * a).ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert_eq!(normal_cdf(0.0), 0.5);
        // Φ(1), Φ(-5), Φ(-20) from high-precision tables
        assert!((normal_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        let rel = (normal_cdf(-5.0) - 2.866_515_718_791_939e-7).abs() / 2.866_515_718_791_939e-7;
        assert!(rel < 1e-13, "{rel}");
        let rel = (normal_cdf(-20.0) - 2.753_624_118_606_233_4e-89).abs() / 2.753_624_118_606_233_4e-89;
        assert!(rel < 1e-12, "{rel}");
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-300, 1e-20, 1e-8, 0.001, 0.02, 0.1, 0.3, 0.5, 0.7, 0.975, 0.999_999] {
            let x = normal_quantile(p);
            let back = normal_cdf(x);
            assert!(
                (back - p).abs() <= 1e-13 * p.min(1.0 - p).max(1e-300) + 1e-300,
                "p={p} x={x} back={back}"
            );
        }
        assert_eq!(normal_quantile(0.5), 0.0);
        assert!((normal_quantile(0.975) - 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn positive_part_matches_definition() {
        for i in -40..=40 {
            let u = i as f64 * 0.25;
            let direct = u * normal_cdf(u) + normal_pdf(u);
            let g = gaussian_positive_part(u);
            assert!((g - direct).abs() <= 1e-14 * (1.0 + u.abs()), "u={u}");
            assert!(g > 0.0);
        }
        assert_eq!(gaussian_positive_part(0.0), INV_SQRT_2PI);
    }

    #[test]
    fn softplus_is_stable() {
        assert_eq!(softplus(0.0), std::f64::consts::LN_2);
        assert_eq!(softplus(1000.0), 1000.0);
        assert!((softplus(-50.0) - (-50.0f64).exp()).abs() < 1e-35);
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0 && sigmoid(800.0) == 1.0);
    }
}
