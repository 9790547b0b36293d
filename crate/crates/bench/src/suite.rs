use std::path::{Path, PathBuf};
use std::time::Instant;

use arclp::mps::{self, MpsFormat};
use arclp::solvers::{self, Prepared};
use arclp::{Algorithm, SolveReport, SolveStatus, SolverConfig, StandardLp};
use rayon::prelude::*;

use crate::{BenchError, BenchRecord};

/// A problem read from disk, standardized and presolved once so that every
/// algorithm starts from the same reduced problem and point.
#[derive(Clone, Debug)]
pub struct LoadedProblem {
    pub name: String,
    pub path: PathBuf,
    pub standard: StandardLp,
    pub prepared: Prepared,
}

impl LoadedProblem {
    pub fn presolved_dims(&self) -> (usize, usize) {
        match self.prepared.reduced() {
            Some(r) => (r.nrows(), r.ncols()),
            None => (self.standard.nrows(), self.standard.ncols()),
        }
    }

    pub fn start_fingerprint(&self) -> String {
        self.prepared
            .start()
            .map(|s| format!("{:016x}", s.fingerprint()))
            .unwrap_or_default()
    }
}

/// Problem name from a file name: the stem, upper-cased.
pub fn problem_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().to_uppercase())
        .unwrap_or_default()
}

/// Reads an MPS file, trying the free layout first and the fixed layout if
/// that fails.
pub fn read_model(path: &Path) -> Result<mps::GeneralLp, BenchError> {
    match mps::read_mps_file(path, MpsFormat::Free) {
        Ok(lp) => Ok(lp),
        Err(arclp::Error::Io(source)) => Err(BenchError::Io {
            path: path.to_path_buf(),
            source,
        }),
        Err(free_err) => {
            mps::read_mps_file(path, MpsFormat::Fixed).map_err(|_| BenchError::from_core(path, free_err))
        }
    }
}

pub fn load_problem(path: &Path, cfg: &SolverConfig) -> Result<LoadedProblem, BenchError> {
    let model = read_model(path)?;
    let (standard, _) = mps::to_standard_form(&model).map_err(|e| BenchError::from_core(path, e))?;
    let prepared = solvers::prepare(&standard, cfg).map_err(|e| BenchError::from_core(path, e))?;
    Ok(LoadedProblem {
        name: problem_name(path),
        path: path.to_path_buf(),
        standard,
        prepared,
    })
}

fn failed_report(algorithm: Algorithm, solve_time: f64) -> SolveReport {
    SolveReport {
        status: SolveStatus::NumericalFailure,
        algorithm,
        iterations: 0,
        per_iteration: Vec::new(),
        objective_primal: f64::NAN,
        objective_dual: f64::NAN,
        composite_metric: f64::NAN,
        theta: None,
        factorizations: 0,
        x: Vec::new(),
        lambda: Vec::new(),
        s: Vec::new(),
        solve_time,
    }
}

/// Runs one algorithm on a loaded problem. Solver errors become a
/// `NumericalFailure` report.
pub fn run_loaded(problem: &LoadedProblem, cfg: &SolverConfig) -> SolveReport {
    let t0 = Instant::now();
    match solvers::solve_prepared(&problem.prepared, cfg) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("{} with {}: {e}", problem.name, cfg.algorithm);
            failed_report(cfg.algorithm, t0.elapsed().as_secs_f64())
        }
    }
}

pub fn record_for(problem: &LoadedProblem, report: &SolveReport) -> BenchRecord {
    let (mp, np) = problem.presolved_dims();
    let finite = |v: f64| v.is_finite().then_some(v);
    BenchRecord {
        problem: problem.name.clone(),
        algorithm: report.algorithm,
        status: report.status,
        iterations: report.iterations,
        composite: finite(report.composite_metric),
        objective: finite(report.objective_primal),
        wall_time: report.solve_time,
        m_original: problem.standard.nrows(),
        n_original: problem.standard.ncols(),
        m_presolved: mp,
        n_presolved: np,
        start_fingerprint: problem.start_fingerprint(),
    }
}

/// Result of [`run_single`].
#[derive(Clone, Debug)]
pub struct SingleRun {
    pub problem: LoadedProblem,
    pub report: SolveReport,
    pub record: BenchRecord,
}

/// Parse, standardize, presolve, solve and postsolve one file.
pub fn run_single(path: &Path, cfg: &SolverConfig) -> Result<SingleRun, BenchError> {
    cfg.validate().map_err(|e| BenchError::from_core(path, e))?;
    let problem = load_problem(path, cfg)?;
    let report = run_loaded(&problem, cfg);
    let record = record_for(&problem, &report);
    Ok(SingleRun {
        problem,
        report,
        record,
    })
}

/// MPS files directly inside `dir`, sorted by name.
pub fn list_problems(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let io = |source| BenchError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        let is_mps = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mps"));
        if path.is_file() && is_mps {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    /// Sorted by `(problem, algorithm)`.
    pub records: Vec<BenchRecord>,
    /// Files that could not be loaded, with the reason.
    pub skipped: Vec<(PathBuf, String)>,
}

/// Every file × algorithm pair with the same presolve, starting point and
/// stopping rules. Problems run in parallel; algorithms on one problem run
/// in sequence.
pub fn run_files(files: &[PathBuf], algorithms: &[Algorithm], cfg: &SolverConfig) -> SuiteOutcome {
    let per_file: Vec<Result<Vec<BenchRecord>, (PathBuf, String)>> = files
        .par_iter()
        .map(|path| {
            let problem = load_problem(path, cfg).map_err(|e| (path.clone(), e.to_string()))?;
            Ok(algorithms
                .iter()
                .map(|&alg| {
                    let alg_cfg = SolverConfig {
                        algorithm: alg,
                        ..cfg.clone()
                    };
                    let report = run_loaded(&problem, &alg_cfg);
                    log::info!(
                        "{} {}: {} in {} iterations",
                        problem.name,
                        alg,
                        report.status,
                        report.iterations
                    );
                    record_for(&problem, &report)
                })
                .collect())
        })
        .collect();
    let mut out = SuiteOutcome::default();
    for r in per_file {
        match r {
            Ok(recs) => out.records.extend(recs),
            Err(skip) => out.skipped.push(skip),
        }
    }
    out.records
        .sort_by(|a, b| (&a.problem, a.algorithm).cmp(&(&b.problem, b.algorithm)));
    out
}

pub fn run_suite(
    dir: &Path,
    algorithms: &[Algorithm],
    cfg: &SolverConfig,
) -> Result<SuiteOutcome, BenchError> {
    if algorithms.is_empty() {
        return Err(BenchError::Usage("no algorithms selected".into()));
    }
    cfg.validate().map_err(|e| BenchError::from_core(dir, e))?;
    let files = list_problems(dir)?;
    Ok(run_files(&files, algorithms, cfg))
}
