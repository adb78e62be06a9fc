//! L1 affine fits against a linear program solved by `microlp`.

use beurling_core::beta::{affine_l1_fit, beta1_function, descent_fit, exhaustive_fit, Interval, SampledFunction};
use microlp::{ComparisonOp, OptimizationDirection, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// min Σ w_i t_i subject to t_i ≥ ±(y_i - a x_i - b).
fn lp_residual(x: &[f64], y: &[f64], w: &[f64]) -> f64 {
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let a = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let b = lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    for i in 0..x.len() {
        let t = lp.add_var(w[i], (0.0, f64::INFINITY));
        lp.add_constraint([(t, 1.0), (a, x[i]), (b, 1.0)], ComparisonOp::Ge, y[i]);
        lp.add_constraint([(t, 1.0), (a, -x[i]), (b, -1.0)], ComparisonOp::Ge, -y[i]);
    }
    let out = lp.solve().expect("feasible LP");
    out.solution().expect("optimal").objective()
}

fn instance(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let mut x: Vec<f64> = Vec::with_capacity(n);
    while x.len() < n {
        let v: f64 = rng.gen_range(-5.0..5.0);
        if x.iter().all(|u| (u - v).abs() > 1e-3) {
            x.push(v);
        }
    }
    let y = x.iter().map(|_| rng.gen_range(-3.0..3.0)).collect();
    let w = x.iter().map(|_| rng.gen_range(0.1..2.0)).collect();
    (x, y, w)
}

#[test]
fn pair_enumeration_matches_lp_on_200_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 0..200 {
        let n = 2 + k % 11;
        let (x, y, w) = instance(&mut rng, n);
        let lp = lp_residual(&x, &y, &w);
        let fit = exhaustive_fit(&x, &y, &w).unwrap();
        assert!((fit.l1_residual - lp).abs() <= 1e-8 * (1.0 + lp), "instance {k}: {} vs {lp}", fit.l1_residual);
    }
}

#[test]
fn descent_matches_lp_on_larger_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..20 {
        let (x, y, w) = instance(&mut rng, 80 + 5 * k);
        let lp = lp_residual(&x, &y, &w);
        let fit = descent_fit(&x, &y, &w).unwrap();
        assert!((fit.l1_residual - lp).abs() <= 1e-8 * (1.0 + lp), "instance {k}: {} vs {lp}", fit.l1_residual);
        let auto = affine_l1_fit(&x, &y, &w).unwrap();
        assert!((auto.l1_residual - lp).abs() <= 1e-8 * (1.0 + lp));
    }
}

#[test]
fn abs_value_fit_is_the_constant_one_and_a_half() {
    // trapezoid weights on a grid of [-3, 3]
    let n = 601;
    let h = 6.0 / (n - 1) as f64;
    let x: Vec<f64> = (0..n).map(|i| -3.0 + i as f64 * h).collect();
    let y: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let w: Vec<f64> = (0..n).map(|i| if i == 0 || i == n - 1 { h / 2.0 } else { h }).collect();
    let lp = lp_residual(&x, &y, &w);
    let fit = affine_l1_fit(&x, &y, &w).unwrap();
    assert!((fit.l1_residual - lp).abs() <= 1e-8 * lp);
    assert!(fit.slope.abs() < 1e-9);
    assert!((fit.intercept - 1.5).abs() < 1e-9);
    assert!((lp - 4.5).abs() < 1e-4, "{lp}");
    let f = SampledFunction::from_fn(-4.0, 4.0, 8001, f64::abs);
    let b = beta1_function(&f, Interval::new(-1.0, 1.0), false).unwrap();
    assert!((b.value - 1.125).abs() < 1e-6, "{}", b.value);
}
