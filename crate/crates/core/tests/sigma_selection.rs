mod common;

use arclp::arc::{self, ArcDerivatives};
use arclp::{Iterate, StandardLp};
use common::fixture;

fn grid_best(fx: &common::Fixture, d: &ArcDerivatives, lo: f64, hi: f64) -> f64 {
    let th = arc::thresholds(&fx.it, 0.01);
    (0..10_000)
        .map(|k| lo + (hi - lo) * k as f64 / 9_999.0)
        .map(|s| arc::max_alpha_for_sigma(&fx.it, d, th, s))
        .fold(0.0, f64::max)
}

#[test]
fn bisection_reaches_grid_maximum() {
    for seed in 0..50 {
        let fx = fixture(seed);
        let d = fx.derivatives();
        let th = arc::thresholds(&fx.it, 0.01);
        for (lo, hi) in [(1e-6, 0.4), (1e-6, 0.3)] {
            let sel = arc::select_sigma_alpha(&fx.it, &d, th, lo, hi, 1e-8);
            let best = grid_best(&fx, &d, lo, hi);
            assert!(sel.alpha >= best - 1e-6, "seed {seed}: {} < {best}", sel.alpha);
            let direct = arc::max_alpha_for_sigma(&fx.it, &d, th, sel.sigma);
            assert_eq!(direct, sel.alpha);
        }
    }
}

#[test]
fn bracket_halves_exactly() {
    for seed in 0..10 {
        let fx = fixture(seed);
        let d = fx.derivatives();
        let th = arc::thresholds(&fx.it, 0.01);
        let sel = arc::select_sigma_alpha(&fx.it, &d, th, 1e-6, 0.4, 1e-8);
        assert!(sel.widths.len() > 2);
        for w in sel.widths.windows(2) {
            assert_eq!(w[1] / w[0], 0.5);
        }
        assert!(*sel.widths.last().unwrap() <= 1e-8);
    }
}

fn synthetic(p_sign: f64) -> (StandardLp, Iterate, ArcDerivatives) {
    let lp = StandardLp::from_dense(&[vec![1.0, 1.0, 1.0]], &[3.0], &[1.0, 1.0, 1.0]).unwrap();
    let it = Iterate::new(&lp, vec![1.0; 3], vec![0.0], vec![1.0; 3], 1.0).unwrap();
    // large first derivatives bind; the σ-part pushes the arc up or down
    let d = ArcDerivatives {
        xdot: vec![2.0, 3.0, 4.0],
        lambda_dot: vec![0.0],
        sdot: vec![2.5, 1.5, 3.5],
        p_x: vec![p_sign * 1.0, p_sign * 2.0, p_sign * 0.5],
        p_lambda: vec![0.0],
        p_s: vec![p_sign * 1.5, p_sign * 0.7, p_sign * 1.1],
        q_x: vec![0.1, -0.2, 0.3],
        q_lambda: vec![0.0],
        q_s: vec![-0.1, 0.2, 0.0],
    };
    (lp, it, d)
}

#[test]
fn monotone_increasing_goes_to_upper_end() {
    let (_, it, d) = synthetic(1.0);
    let th = arc::thresholds(&it, 0.01);
    let sel = arc::select_sigma_alpha(&it, &d, th, 1e-6, 0.4, 1e-8);
    assert!((sel.sigma - 0.4).abs() <= 1e-8);
}

#[test]
fn monotone_decreasing_goes_to_lower_end() {
    let (_, it, d) = synthetic(-1.0);
    let th = arc::thresholds(&it, 0.01);
    let sel = arc::select_sigma_alpha(&it, &d, th, 1e-6, 0.4, 1e-8);
    assert!((sel.sigma - 1e-6).abs() <= 1e-8);
}
