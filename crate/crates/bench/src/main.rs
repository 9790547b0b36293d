use std::fs::File;
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arclp::{Algorithm, SolverConfig};
use arclp_bench::profile::{performance_profile, Metric, ProfileOptions};
use arclp_bench::{
    default_config, load_config, read_records, run_single, run_suite, write_records, BenchError,
};
use clap::{Args, Parser, Subcommand};

/// Arc-search and Mehrotra interior-point LP solvers.
#[derive(Parser)]
#[command(name = "arclp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one MPS file.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
        /// Print the primal solution.
        #[arg(long)]
        show_x: bool,
    },
    /// Run every algorithm on every .mps file in a directory.
    Bench {
        dir: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "arc1,arc2,mpc")]
        algs: Vec<Algorithm>,
        #[arg(long, default_value = "results.csv")]
        out: PathBuf,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Performance profile from a results CSV.
    Profile {
        results: PathBuf,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
        /// iterations or time.
        #[arg(long, default_value = "iterations")]
        metric: Metric,
        #[arg(long, default_value_t = 10.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
}

#[derive(Args)]
struct SolveOpts {
    /// Algorithm for `solve`: arc1, arc2 or mpc.
    #[arg(long)]
    alg: Option<Algorithm>,
    /// TOML file with solver settings.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Stopping tolerance on the composite metric.
    #[arg(long)]
    tol: Option<f64>,
    /// Seconds per problem and algorithm.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    no_presolve: bool,
}

impl SolveOpts {
    fn config(&self) -> Result<SolverConfig, BenchError> {
        let mut cfg = match &self.config {
            Some(p) => load_config(p)?,
            None => default_config(),
        };
        if let Some(a) = self.alg {
            cfg.algorithm = a;
        }
        if let Some(n) = self.max_iter {
            cfg.max_iterations = n;
        }
        if let Some(t) = self.tol {
            cfg.epsilon = t;
        }
        if let Some(t) = self.time_limit {
            cfg.time_limit = Some(t);
        }
        if self.no_presolve {
            cfg.presolve_enabled = false;
        }
        cfg.validate()
            .map_err(|e| BenchError::Usage(format!("invalid settings: {e}")))?;
        Ok(cfg)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, BenchError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| BenchError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into())
}

fn solve(file: &Path, opts: &SolveOpts, show_x: bool) -> Result<bool, BenchError> {
    let cfg = opts.config()?;
    let run = run_single(file, &cfg)?;
    let (rep, rec) = (&run.report, &run.record);
    println!("problem      {}", rec.problem);
    println!("algorithm    {}", rec.algorithm);
    println!(
        "size         {}x{} -> {}x{}",
        rec.m_original, rec.n_original, rec.m_presolved, rec.n_presolved
    );
    println!("status       {}", rep.status);
    println!("iterations   {}", rep.iterations);
    println!("objective    {}", fmt_opt(rec.objective));
    println!("composite    {}", fmt_opt(rec.composite));
    if let Some(theta) = rep.theta {
        println!("theta        {theta:.6}");
    }
    println!("time         {:.3}s", rep.solve_time);
    if show_x {
        for (j, v) in rep.x.iter().enumerate() {
            println!("x[{j}] = {v:.10e}");
        }
    }
    Ok(rep.status.is_optimal())
}

fn bench(dir: &Path, algs: &[Algorithm], out: &Path, opts: &SolveOpts) -> Result<bool, BenchError> {
    let cfg = opts.config()?;
    let outcome = run_suite(dir, algs, &cfg)?;
    for (path, why) in &outcome.skipped {
        eprintln!("skipped {}: {why}", path.display());
    }
    write_records(create(out)?, &outcome.records)?;
    println!(
        "{:<12} {:<5} {:<18} {:>5} {:>13} {:>9}",
        "problem", "alg", "status", "iter", "composite", "time"
    );
    for r in &outcome.records {
        println!(
            "{:<12} {:<5} {:<18} {:>5} {:>13} {:>8.3}s",
            r.problem,
            r.algorithm.short_name(),
            r.status.to_string(),
            r.iterations,
            fmt_opt(r.composite),
            r.wall_time
        );
    }
    let solved = outcome.records.iter().filter(|r| r.solved()).count();
    println!(
        "{solved}/{} runs optimal, written to {}",
        outcome.records.len(),
        out.display()
    );
    Ok(outcome.skipped.is_empty() && solved == outcome.records.len())
}

fn profile(results: &Path, out: &Path, opts: ProfileOptions) -> Result<bool, BenchError> {
    let file = File::open(results).map_err(|source| BenchError::Io {
        path: results.to_path_buf(),
        source,
    })?;
    let records = read_records(io::BufReader::new(file))?;
    let prof = performance_profile(&records, &opts)?;
    prof.write_csv(create(out)?)?;
    let last = prof.taus.len() - 1;
    println!(
        "{:<5} {:>8} {:>8}",
        "alg",
        "rho(1)",
        format!("rho({})", opts.tau_max)
    );
    for (a, alg) in prof.algorithms.iter().enumerate() {
        println!(
            "{:<5} {:>8.3} {:>8.3}",
            alg.short_name(),
            prof.rho[a][0],
            prof.rho[a][last]
        );
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve { file, opts, show_x } => solve(file, opts, *show_x),
        Command::Bench { dir, algs, out, opts } => bench(dir, algs, out, opts),
        Command::Profile {
            results,
            out,
            metric,
            tau_max,
            points,
        } => profile(
            results,
            out,
            ProfileOptions {
                metric: *metric,
                tau_max: *tau_max,
                points: *points,
            },
        ),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
