mod common;

use common::*;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;
use smoothsvm::{CsrMatrix, HessianOperator};

#[test]
fn products_match_dense() {
    let mut r = rng(1);
    for _ in 0..20 {
        let x = random_csr(&mut r, 30, 20, 0.3);
        let xd = dense(&x);
        let s = random_vec(&mut r, 20, 1.0);
        let u = random_vec(&mut r, 30, 1.0);
        let xs = x.matvec(&s).unwrap();
        let xtu = x.transpose_matvec(&u).unwrap();
        let xs_ref = &xd * DVector::from_column_slice(&s);
        let xtu_ref = xd.transpose() * DVector::from_column_slice(&u);
        for (a, b) in xs.iter().zip(xs_ref.iter()) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
        for (a, b) in xtu.iter().zip(xtu_ref.iter()) {
            assert!((a - b).abs() <= 1e-14 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn hessian_product_matches_dense_assembly() {
    let mut r = rng(2);
    for _ in 0..100 {
        let n = r.random_range(1..=50);
        let p = r.random_range(1..=50);
        let x = random_csr(&mut r, n, p, 0.2);
        let lambda = 10f64.powf(r.random_range(-4.0..0.0));
        let d: Vec<f64> = (0..n).map(|_| r.random_range(0.0..3.0)).collect();
        let h = HessianOperator::new(lambda, &x, d.clone()).unwrap();
        let s = random_vec(&mut r, p, 1.0);
        let hs = h.apply(&s).unwrap();
        let reference = dense_hessian(lambda, &x, &d) * DVector::from_column_slice(&s);
        assert!(rel_diff(&hs, reference.as_slice()) <= 1e-10);
        let q = h.quadratic_form(&s).unwrap();
        let q_ref: f64 = s.iter().zip(&hs).map(|(a, b)| a * b).sum();
        assert!((q - q_ref).abs() <= 1e-10 * q_ref.abs());
    }
}

#[test]
fn explicit_zeros_are_harmless() {
    let with = CsrMatrix::from_rows(3, &[vec![(0, 1.0), (1, 0.0), (2, 2.0)]]).unwrap();
    let without = CsrMatrix::from_rows(3, &[vec![(0, 1.0), (2, 2.0)]]).unwrap();
    let s = [0.5, 7.0, -1.0];
    assert_eq!(with.matvec(&s).unwrap(), without.matvec(&s).unwrap());
    assert_eq!(
        with.transpose_matvec(&[2.0]).unwrap(),
        without.transpose_matvec(&[2.0]).unwrap()
    );
}

proptest! {
    #[test]
    fn hessian_is_linear_and_positive(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut r = rng(seed);
        let n = r.random_range(1..=30);
        let p = r.random_range(1..=30);
        let x = random_csr(&mut r, n, p, 0.3);
        let lambda = 0.1;
        let d: Vec<f64> = (0..n).map(|_| r.random_range(0.0..2.0)).collect();
        let h = HessianOperator::new(lambda, &x, d).unwrap();
        let s1 = random_vec(&mut r, p, 1.0);
        let s2 = random_vec(&mut r, p, 1.0);
        let combo: Vec<f64> = s1.iter().zip(&s2).map(|(x, y)| a * x + b * y).collect();
        let lhs = h.apply(&combo).unwrap();
        let (h1, h2) = (h.apply(&s1).unwrap(), h.apply(&s2).unwrap());
        for i in 0..p {
            let rhs = a * h1[i] + b * h2[i];
            prop_assert!((lhs[i] - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
        }
        let ss: f64 = s1.iter().map(|v| v * v).sum();
        let shs: f64 = s1.iter().zip(&h1).map(|(x, y)| x * y).sum();
        prop_assert!(shs >= lambda * ss * (1.0 - 1e-12));
    }
}
