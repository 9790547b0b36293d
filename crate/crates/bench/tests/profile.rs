use arclp::{Algorithm, SolveStatus};
use arclp_bench::profile::{log_grid, performance_profile, Metric, ProfileOptions};
use arclp_bench::{BenchError, BenchRecord};
use proptest::prelude::*;

fn rec(
    problem: &str,
    algorithm: Algorithm,
    iterations: usize,
    wall_time: f64,
    status: SolveStatus,
) -> BenchRecord {
    BenchRecord {
        problem: problem.into(),
        algorithm,
        status,
        iterations,
        composite: None,
        objective: None,
        wall_time,
        m_original: 1,
        n_original: 1,
        m_presolved: 1,
        n_presolved: 1,
        start_fingerprint: String::new(),
    }
}

fn ok(problem: &str, algorithm: Algorithm, iterations: usize) -> BenchRecord {
    rec(
        problem,
        algorithm,
        iterations,
        iterations as f64 * 0.01,
        SolveStatus::Optimal,
    )
}

fn opts(tau_max: f64, points: usize) -> ProfileOptions {
    ProfileOptions {
        metric: Metric::Iterations,
        tau_max,
        points,
    }
}

#[test]
fn grid_is_logarithmic_from_one() {
    let g = log_grid(100.0, 3);
    assert_eq!(g[0], 1.0);
    assert!((g[1] - 10.0).abs() < 1e-12);
    assert_eq!(g[2], 100.0);
    assert_eq!(log_grid(5.0, 1), vec![1.0]);
}

#[test]
fn hand_computed_ratios() {
    let records = vec![
        ok("A", Algorithm::Arc1, 10),
        ok("A", Algorithm::Arc2, 25),
        ok("B", Algorithm::Arc1, 12),
        ok("B", Algorithm::Arc2, 6),
        rec("C", Algorithm::Arc1, 150, 1.0, SolveStatus::IterationLimit),
        ok("C", Algorithm::Arc2, 9),
    ];
    let p = performance_profile(&records, &opts(4.0, 3)).unwrap();
    assert_eq!(p.algorithms, vec![Algorithm::Arc1, Algorithm::Arc2]);
    assert_eq!(p.ratios[0], vec![1.0, 2.0, f64::INFINITY]);
    assert_eq!(p.ratios[1], vec![2.5, 1.0, 1.0]);
    assert_eq!(p.rho[0], vec![1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0]);
    assert_eq!(p.rho[1], vec![2.0 / 3.0, 2.0 / 3.0, 1.0]);
}

#[test]
fn single_algorithm_is_always_best() {
    let records = vec![ok("A", Algorithm::Arc2, 10), ok("B", Algorithm::Arc2, 3)];
    let p = performance_profile(&records, &ProfileOptions::default()).unwrap();
    assert!(p.rho[0].iter().all(|&r| r == 1.0));
}

#[test]
fn dominating_algorithm_starts_at_one() {
    let records = vec![
        ok("A", Algorithm::Arc1, 10),
        ok("A", Algorithm::MehrotraPC, 5),
        ok("B", Algorithm::Arc1, 8),
        ok("B", Algorithm::MehrotraPC, 8),
    ];
    let p = performance_profile(&records, &ProfileOptions::default()).unwrap();
    let mpc = p
        .algorithms
        .iter()
        .position(|a| *a == Algorithm::MehrotraPC)
        .unwrap();
    assert_eq!(p.rho[mpc][0], 1.0);
}

#[test]
fn ties_and_zero_metrics_count_as_best() {
    let records = vec![
        rec("A", Algorithm::Arc1, 0, 0.0, SolveStatus::Optimal),
        rec("A", Algorithm::Arc2, 0, 0.0, SolveStatus::Optimal),
        rec("B", Algorithm::Arc1, 3, 0.0, SolveStatus::Optimal),
        rec("B", Algorithm::Arc2, 4, 0.5, SolveStatus::Optimal),
    ];
    let time = ProfileOptions {
        metric: Metric::WallTime,
        ..ProfileOptions::default()
    };
    let p = performance_profile(&records, &time).unwrap();
    assert_eq!(p.ratios[0], vec![1.0, 1.0]);
    assert_eq!(p.ratios[1], vec![1.0, f64::INFINITY]);
}

#[test]
fn missing_pair_counts_as_failure() {
    let records = vec![
        ok("A", Algorithm::Arc1, 4),
        ok("A", Algorithm::Arc2, 4),
        ok("B", Algorithm::Arc1, 4),
    ];
    let p = performance_profile(&records, &ProfileOptions::default()).unwrap();
    assert_eq!(p.ratios[1], vec![1.0, f64::INFINITY]);
    assert_eq!(*p.rho[1].last().unwrap(), 0.5);
}

#[test]
fn bad_input_is_a_usage_error() {
    assert!(matches!(
        performance_profile(&[], &ProfileOptions::default()),
        Err(BenchError::Usage(_))
    ));
    let records = vec![ok("A", Algorithm::Arc1, 1)];
    assert!(matches!(
        performance_profile(&records, &opts(0.5, 10)),
        Err(BenchError::Usage(_))
    ));
}

#[test]
fn csv_is_long_format() {
    let records = vec![ok("A", Algorithm::Arc1, 2), ok("A", Algorithm::Arc2, 4)];
    let p = performance_profile(&records, &opts(2.0, 2)).unwrap();
    let mut buf = Vec::new();
    p.write_csv(&mut buf).unwrap();
    assert_eq!(
        String::from_utf8(buf).unwrap(),
        "algorithm,tau,rho\narc1,1.0,1.0\narc1,2.0,1.0\narc2,1.0,0.0\narc2,2.0,1.0\n"
    );
}

proptest! {
    #[test]
    fn rho_is_monotone_and_bounded(runs in proptest::collection::vec((0usize..8, 0usize..3, 1usize..100, any::<bool>()), 1..60)) {
        let algs = [Algorithm::Arc1, Algorithm::Arc2, Algorithm::MehrotraPC];
        let records: Vec<BenchRecord> = runs
            .iter()
            .map(|&(p, a, it, solved)| {
                let status = if solved { SolveStatus::Optimal } else { SolveStatus::StepTooSmall };
                rec(&format!("P{p}"), algs[a], it, it as f64, status)
            })
            .collect();
        let p = performance_profile(&records, &ProfileOptions::default()).unwrap();
        for rho in &p.rho {
            prop_assert!(rho.windows(2).all(|w| w[0] <= w[1]));
            prop_assert!(rho.iter().all(|r| (0.0..=1.0).contains(r)));
        }
        // some algorithm is best on every problem with a solved run
        let solvable = p.problems.iter().enumerate().filter(|(j, _)| p.ratios.iter().any(|r| r[*j] == 1.0)).count();
        let at_one: f64 = p.rho.iter().map(|r| r[0]).sum();
        prop_assert!(at_one * p.problems.len() as f64 >= solvable as f64 - 1e-9);
    }
}
