mod common;

use common::{mlp_gradient_check, penalty_gradient_check, random_tensor};
use ganbench::rng::rng;
use ganbench::tensor::{ExprGraph, Tensor};
use proptest::prelude::*;

#[test]
fn random_mlp_gradients_match_finite_differences() {
    for seed in 0..50 {
        let c = mlp_gradient_check(seed, 300);
        assert!(c.max_rel <= 1e-5, "seed {seed}: max relative error {}", c.max_rel);
    }
}

#[test]
fn penalty_double_backward_matches_finite_differences() {
    for seed in 0..10 {
        let c = penalty_gradient_check(seed);
        assert!(c.max_rel <= 1e-4, "seed {seed}: max relative error {}", c.max_rel);
    }
}

fn linear_loss(a: &Tensor, w: &Tensor) -> (f64, Tensor) {
    let mut g = ExprGraph::new();
    let x = g.param("x", a.clone());
    let c = g.constant(w.clone());
    let m = g.matmul(x, c).unwrap();
    let t = g.tanh(m).unwrap();
    let s = g.sum(t).unwrap();
    let v = g.value(s).unwrap().item();
    (v, g.backward(s).unwrap().remove("x").unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_is_linear_in_the_output(seed in any::<u64>(), k in -3.0f64..3.0) {
        let mut r = rng(seed);
        let a = random_tensor(&mut r, &[3, 4], 1.0);
        let w = random_tensor(&mut r, &[4, 2], 1.0);
        let mut g = ExprGraph::new();
        let x = g.param("x", a);
        let c = g.constant(w);
        let m = g.matmul(x, c).unwrap();
        let t = g.tanh(m).unwrap();
        let s = g.sum(t).unwrap();
        let ks = g.scale(s, k).unwrap();
        let base = g.backward(s).unwrap().remove("x").unwrap();
        let scaled = g.backward(ks).unwrap().remove("x").unwrap();
        for (b, sc) in base.data().iter().zip(scaled.data()) {
            prop_assert!((k * b - sc).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_tensor(&mut r, &[5, 3], 2.0);
        let w = random_tensor(&mut r, &[3, 3], 2.0);
        let (v1, g1) = linear_loss(&a, &w);
        let (v2, g2) = linear_loss(&a, &w);
        prop_assert_eq!(v1.to_bits(), v2.to_bits());
        prop_assert_eq!(g1, g2);
    }

    #[test]
    fn sum_rule(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_tensor(&mut r, &[2, 3], 1.0);
        let mut g = ExprGraph::new();
        let x = g.param("x", a);
        let s1 = g.sigmoid(x).unwrap();
        let s2 = g.square(x).unwrap();
        let f1 = g.sum(s1).unwrap();
        let f2 = g.sum(s2).unwrap();
        let both = g.add(f1, f2).unwrap();
        let d1 = g.backward(f1).unwrap().remove("x").unwrap();
        let d2 = g.backward(f2).unwrap().remove("x").unwrap();
        let d = g.backward(both).unwrap().remove("x").unwrap();
        for ((u, v), w) in d1.data().iter().zip(d2.data()).zip(d.data()) {
            prop_assert!((u + v - w).abs() <= 1e-12);
        }
    }
}
