mod common;

use common::{fd_deviation, Expr, VARS};
use gkl::jets::{Jet, JetMatrix, C64};
use gkl::sampling::{complex_normal, rng_for};
use proptest::prelude::*;

#[test]
fn random_expressions_match_finite_differences() {
    for i in 0..50 {
        let mut rng = rng_for(77, i);
        let e = Expr::random(&mut rng, 4);
        let z: Vec<C64> = (0..VARS).map(|_| complex_normal(&mut rng) * 0.6).collect();
        let dev = fd_deviation(&e, &z);
        assert!(dev < 1e-6, "expression {i}: {dev:e}\n{e:?}");
    }
}

#[test]
fn ln_det_hessian_is_fubini_study() {
    // ∂∂̄ log(1 + |z|²) = (1 + |z|²)^{-2} on C
    let z = C64::new(0.3, -0.7);
    let ns = 4;
    let v = Jet::variable(z, 0, ns);
    let f = (Jet::constant(C64::new(1.0, 0.0)) + &v * &v.conj()).ln().unwrap();
    let expected = 1.0 / (1.0 + z.norm_sqr()).powi(2);
    assert!((f.d2(0, 1).unwrap() - expected).norm() < 1e-15);
}

#[test]
fn matrix_inverse_and_det_jets() {
    let ns = 4 * 4;
    let vals = [C64::new(1.2, 0.1), C64::new(0.3, -0.2), C64::new(-0.4, 0.5), C64::new(0.9, 0.0)];
    let m = JetMatrix::from_fn(2, 2, |i, j| Jet::variable(vals[2 * i + j], 2 * i + j, ns));
    let inv = m.inverse().unwrap();
    let prod = m.matmul(&inv).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let e = prod.get(i, j);
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((e.value() - target).norm() < 1e-14);
            for s in 0..ns {
                assert!(e.d(s).unwrap().norm() < 1e-14);
            }
        }
    }
    // ∂ det / ∂ m_ij is the cofactor
    let det = m.det().unwrap();
    assert!((det.d(0).unwrap() - vals[3]).norm() < 1e-14);
    assert!((det.d(1).unwrap() + vals[2]).norm() < 1e-14);
}

#[test]
fn derivative_consumes_an_order() {
    let v = Jet::variable(C64::new(0.5, 0.5), 0, 4);
    let sq = &v * &v;
    let d = sq.derivative(0).unwrap();
    assert_eq!(d.value(), C64::new(1.0, 1.0));
    let dd = d.derivative(0).unwrap();
    assert_eq!(dd.value(), C64::new(2.0, 0.0));
    assert!(matches!(dd.derivative(0), Err(gkl::Error::JetOrderExhausted)));
}

#[test]
fn domain_errors() {
    let zero = Jet::constant(C64::new(0.0, 0.0));
    assert!(zero.recip().is_err());
    assert!(Jet::constant(C64::new(-1.0, 0.0)).ln().is_err());
    assert!(Jet::constant(C64::new(1.0, 1.0)).ln().is_err());
}

proptest! {
    #[test]
    fn conj_is_an_involution(re in -2.0f64..2.0, im in -2.0f64..2.0, slot in 0usize..8) {
        let v = Jet::variable(C64::new(re, im), slot, 8);
        let w = &(&v * &v) + &v.conj();
        prop_assert_eq!(w.conj().conj(), w);
    }

    #[test]
    fn product_rule(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let x = Jet::variable(C64::new(a, b), 0, 4);
        let y = x.conj();
        let p = &x * &y;
        prop_assert!((p.d(0).unwrap() - y.value()).norm() < 1e-15);
        prop_assert!((p.d(1).unwrap() - x.value()).norm() < 1e-15);
        prop_assert!((p.d2(0, 1).unwrap() - 1.0).norm() < 1e-15);
    }
}
