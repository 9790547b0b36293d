mod common;

use arclp::arc::{self, alpha_case};
use common::fixture;
use proptest::prelude::*;
use std::f64::consts::FRAC_PI_2;
use testkit::{arc_slack, step_oracle};

#[test]
fn mu_model_matches_direct_evaluation() {
    for seed in 0..30 {
        let fx = fixture(seed);
        let d = fx.derivatives();
        let mut r = testkit::rng(seed + 500);
        for _ in 0..100 {
            use rand::Rng;
            let sigma = r.gen_range(0.0..1.0);
            let alpha = r.gen_range(0.0..FRAC_PI_2);
            let (x, _, s) = arc::ellipse_point(&fx.it, &d, sigma, alpha);
            let direct = x.iter().zip(&s).map(|(p, q)| p * q).sum::<f64>() / x.len() as f64;
            let model = arc::mu_of_sigma_alpha(&fx.it, &d, sigma, alpha);
            assert!(
                (model - direct).abs() <= 1e-10 * direct.abs().max(fx.it.mu()),
                "seed {seed}"
            );
        }
    }
}

#[test]
fn mu_model_at_zero_angle() {
    let fx = fixture(2);
    let d = fx.derivatives();
    for sigma in [0.0, 0.5, 1.0] {
        assert_eq!(arc::mu_of_sigma_alpha(&fx.it, &d, sigma, 0.0), fx.it.mu());
    }
}

#[test]
fn case_examples() {
    // no motion
    assert_eq!(alpha_case(1.0, 0.5, 0.0, 0.0), FRAC_PI_2);
    // already below the floor
    assert_eq!(alpha_case(0.4, 0.5, 1.0, 1.0), 0.0);
    // 1 − 2 sin α ≥ 0
    assert!((alpha_case(1.0, 0.0, 2.0, 0.0) - std::f64::consts::FRAC_PI_6).abs() < 1e-15);
    // 1 − 2(1 − cos α) ≥ 0
    assert!((alpha_case(1.0, 0.0, 0.0, -2.0) - std::f64::consts::FRAC_PI_3).abs() < 1e-15);
    // moving away from the floor
    assert_eq!(alpha_case(1.0, 0.0, -1.0, 3.0), FRAC_PI_2);
}

fn signed(kind: i8, mag: f64) -> f64 {
    match kind {
        1 => mag,
        -1 => -mag,
        _ => 0.0,
    }
}

fn check_family(vdot_sign: i8, vddot_sign: i8) {
    let mut r = testkit::rng(((vdot_sign + 2) * 10 + vddot_sign + 2) as u64);
    use rand::Rng;
    let mut checked = 0usize;
    while checked < 100_000 {
        let v: f64 = r.gen_range(1e-3..10.0);
        let floor = v * r.gen_range(0.0..0.99);
        let vdot = signed(vdot_sign, 10f64.powf(r.gen_range(-3.0..2.0)));
        let vddot = signed(vddot_sign, 10f64.powf(r.gen_range(-3.0..2.0)));
        let a = alpha_case(v, floor, vdot, vddot);
        let o = step_oracle(v, floor, vdot, vddot, 60);
        assert!(
            (a - o).abs() <= 1e-8,
            "({v}, {floor}, {vdot}, {vddot}): {a} vs {o}"
        );
        if a < FRAC_PI_2 {
            assert!(
                arc_slack(v, floor, vdot, vddot, a + 1e-6) < 0.0,
                "predicate holds past α for ({v}, {floor}, {vdot}, {vddot})"
            );
        }
        checked += 1;
    }
}

#[test]
fn family_first_only_increasing() {
    check_family(1, 0);
}

#[test]
fn family_first_only_decreasing() {
    check_family(-1, 0);
}

#[test]
fn family_second_only_positive() {
    check_family(0, 1);
}

#[test]
fn family_second_only_negative() {
    check_family(0, -1);
}

#[test]
fn family_both_positive() {
    check_family(1, 1);
}

#[test]
fn family_positive_negative() {
    check_family(1, -1);
}

#[test]
fn family_negative_positive() {
    check_family(-1, 1);
}

#[test]
fn family_both_negative() {
    check_family(-1, -1);
}

proptest! {
    #[test]
    fn case_is_within_quarter_turn(v in -1.0f64..10.0, floor in 0.0f64..1.0, vdot in -50.0f64..50.0, vddot in -50.0f64..50.0) {
        let a = alpha_case(v, floor, vdot, vddot);
        prop_assert!((0.0..=FRAC_PI_2).contains(&a));
        if v >= floor {
            // the whole arc up to α stays above the floor
            for k in 0..=32 {
                let t = a * k as f64 / 32.0;
                prop_assert!(arc_slack(v, floor, vdot, vddot, t) >= -1e-9 * (1.0 + v.abs() + vdot.abs() + vddot.abs()));
            }
        }
    }

    #[test]
    fn vector_step_matches_oracle(seed in 0u64..5000, sigma in 0.0f64..1.0) {
        let fx = fixture(seed);
        let d = fx.derivatives();
        let th = arc::thresholds(&fx.it, 0.01);
        let got = arc::max_alpha_for_sigma(&fx.it, &d, th, sigma);
        let ox = testkit::vector_step_oracle(fx.it.x(), th.phi, &d.xdot, &d.xddot(sigma));
        let os = testkit::vector_step_oracle(fx.it.s(), th.psi, &d.sdot, &d.sddot(sigma));
        prop_assert!((got - ox.min(os)).abs() <= 1e-8);
    }
}
