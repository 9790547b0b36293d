use arclp::presolve::{self, PresolveOptions, PresolveResult, Reduction};
use arclp::{solvers, Algorithm, SolverConfig, StandardLp};
use proptest::prelude::*;

fn reducible_lp(seed: u64) -> StandardLp {
    let (a, b, c) = testkit::reducible_instance(seed);
    StandardLp::from_dense(&a, &b, &c).unwrap()
}

fn reduce(lp: &StandardLp) -> (StandardLp, presolve::PresolveTrace) {
    match presolve::presolve(lp, &PresolveOptions::default()).unwrap() {
        PresolveResult::Reduced { lp, trace } => (lp, trace),
        other => panic!("unexpected verdict {other:?}"),
    }
}

#[test]
fn every_rule_fires() {
    let (red, trace) = reduce(&reducible_lp(1));
    let has = |f: fn(&Reduction) -> bool| trace.reductions.iter().any(f);
    assert!(has(|r| matches!(r, Reduction::ZeroRow { .. })));
    assert!(has(|r| matches!(r, Reduction::ZeroColumn { .. })));
    assert!(has(|r| matches!(r, Reduction::RowSingleton { .. })));
    assert!(has(|r| matches!(r, Reduction::DuplicateRow { .. })));
    assert!(has(|r| matches!(r, Reduction::FreeColumnSingleton { .. })));
    assert!(red.nrows() < trace.original_dims().0);
}

/// Both solves stop well below the comparison tolerance, so the objective
/// difference measures the reductions rather than the stopping point.
fn tight(alg: Algorithm, presolve_enabled: bool) -> SolverConfig {
    SolverConfig {
        epsilon: 1e-10,
        presolve_enabled,
        ..SolverConfig::for_algorithm(alg)
    }
}

#[test]
fn round_trip_objective_matches_unreduced_solve() {
    for seed in 0..12 {
        let lp = reducible_lp(seed);
        for alg in [Algorithm::Arc1, Algorithm::Arc2, Algorithm::MehrotraPC] {
            let with = solvers::solve(&lp, &tight(alg, true)).unwrap();
            let without = solvers::solve(&lp, &tight(alg, false)).unwrap();
            assert!(with.status.is_optimal(), "seed {seed} {alg}: {}", with.status);
            assert!(
                without.status.is_optimal(),
                "seed {seed} {alg}: {}",
                without.status
            );
            let rel = (with.objective_primal - without.objective_primal).abs()
                / without.objective_primal.abs().max(1.0);
            assert!(rel <= 1e-8, "seed {seed} {alg}: {rel:e}");
            // the postsolved point is primal feasible for the original rows
            let ax = lp.a.mul_vec(&with.x);
            let err = testkit::max_abs_diff(&ax, &lp.b);
            assert!(
                err <= 1e-6 * (1.0 + testkit::norm2(&lp.b)),
                "seed {seed}: {err:e}"
            );
            assert!(with.x.iter().all(|v| *v >= -1e-9));
        }
    }
}

#[test]
fn postsolve_of_exact_solution_is_exact() {
    let lp = reducible_lp(3);
    let (red, trace) = reduce(&lp);
    let rep = solvers::solve(
        &red,
        &SolverConfig {
            presolve_enabled: false,
            ..SolverConfig::default()
        },
    )
    .unwrap();
    let (x, _, _) = presolve::postsolve(&trace, &rep.x, &rep.lambda, &rep.s).unwrap();
    let full = lp.primal_objective(&x);
    let reduced = red.primal_objective(&rep.x) + red.offset;
    assert!((full - reduced).abs() <= 1e-9 * full.abs().max(1.0));
}

#[test]
fn postsolve_rejects_wrong_dimensions() {
    let (_, trace) = reduce(&reducible_lp(2));
    assert!(presolve::postsolve(&trace, &[1.0], &[], &[1.0]).is_err());
}

#[test]
fn disabled_rules_leave_problem_untouched() {
    let lp = reducible_lp(4);
    let opts = PresolveOptions {
        rules: presolve::RuleSet::none(),
        ..PresolveOptions::default()
    };
    match presolve::presolve(&lp, &opts).unwrap() {
        PresolveResult::Reduced { lp: red, trace } => {
            assert!(trace.is_identity());
            assert_eq!(red.a, lp.a);
        }
        other => panic!("{other:?}"),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn presolve_is_idempotent(seed in 0u64..10_000) {
        let (red, _) = reduce(&reducible_lp(seed));
        let (again, trace) = reduce(&red);
        prop_assert!(trace.is_identity());
        prop_assert_eq!(again.a, red.a);
        prop_assert_eq!(again.b, red.b);
        prop_assert_eq!(again.c, red.c);
        prop_assert_eq!(again.offset, red.offset);
    }

    #[test]
    fn random_instances_have_nothing_to_remove(seed in 0u64..10_000) {
        let d = testkit::random_instance(seed);
        let lp = StandardLp::from_dense(&d.a, &d.b, &d.c).unwrap();
        let (_, trace) = reduce(&lp);
        // dense instances have no singleton or empty structure
        if seed % 2 == 0 {
            prop_assert!(trace.is_identity());
        }
    }
}
