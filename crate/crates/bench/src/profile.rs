//! Performance profiles: for each algorithm, the fraction of problems it
//! solves within a factor τ of the best algorithm on that problem.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use arclp::Algorithm;
use serde::{Deserialize, Serialize};

use crate::{BenchError, BenchRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Iterations,
    WallTime,
}

impl std::str::FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "iterations" => Ok(Metric::Iterations),
            "wall_time" | "time" => Ok(Metric::WallTime),
            other => Err(format!("unknown metric '{other}'")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfileOptions {
    pub metric: Metric,
    pub tau_max: f64,
    /// Number of grid points, both ends included.
    pub points: usize,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            metric: Metric::Iterations,
            tau_max: 10.0,
            points: 101,
        }
    }
}

/// `τ_k = τ_max^{k/(points−1)}`, so the grid starts at exactly 1.
pub fn log_grid(tau_max: f64, points: usize) -> Vec<f64> {
    if points <= 1 {
        return vec![1.0];
    }
    (0..points)
        .map(|k| tau_max.powf(k as f64 / (points - 1) as f64))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub algorithm: String,
    pub tau: f64,
    pub rho: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub algorithms: Vec<Algorithm>,
    pub problems: Vec<String>,
    pub taus: Vec<f64>,
    /// `rho[a][k]` for algorithm `a` at `taus[k]`.
    pub rho: Vec<Vec<f64>>,
    /// `ratios[a][p]`, `+∞` for failures.
    pub ratios: Vec<Vec<f64>>,
}

impl Profile {
    pub fn rows(&self) -> Vec<ProfileRow> {
        let mut out = Vec::new();
        for (a, alg) in self.algorithms.iter().enumerate() {
            for (k, &tau) in self.taus.iter().enumerate() {
                out.push(ProfileRow {
                    algorithm: alg.short_name().to_string(),
                    tau,
                    rho: self.rho[a][k],
                });
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), BenchError> {
        let mut out = csv::Writer::from_writer(w);
        for row in self.rows() {
            out.serialize(row)?;
        }
        out.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn metric_of(r: &BenchRecord, metric: Metric) -> f64 {
    if !r.solved() {
        return f64::INFINITY;
    }
    match metric {
        Metric::Iterations => r.iterations as f64,
        Metric::WallTime => r.wall_time,
    }
}

/// Ratio of `value` to the best value on the problem. Equal values give 1
/// (also when both are 0); a positive value against a best of 0 gives `+∞`.
fn ratio(value: f64, best: f64) -> f64 {
    if value.is_infinite() {
        f64::INFINITY
    } else if value == best {
        1.0
    } else if best == 0.0 {
        f64::INFINITY
    } else {
        value / best
    }
}

/// Builds the profile over every problem that appears in `records`. A
/// missing `(problem, algorithm)` pair counts as a failure.
pub fn performance_profile(records: &[BenchRecord], opts: &ProfileOptions) -> Result<Profile, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Usage("no records to profile".into()));
    }
    if !(opts.tau_max >= 1.0) || opts.points == 0 {
        return Err(BenchError::Usage(
            "need τ_max ≥ 1 and at least one grid point".into(),
        ));
    }
    let algorithms: Vec<Algorithm> = records
        .iter()
        .map(|r| r.algorithm)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let problems: Vec<String> = records
        .iter()
        .map(|r| r.problem.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut value: BTreeMap<(&str, Algorithm), f64> = BTreeMap::new();
    for r in records {
        value.insert((r.problem.as_str(), r.algorithm), metric_of(r, opts.metric));
    }
    let lookup = |p: &str, a: Algorithm| value.get(&(p, a)).copied().unwrap_or(f64::INFINITY);

    let ratios: Vec<Vec<f64>> = algorithms
        .iter()
        .map(|&a| {
            problems
                .iter()
                .map(|p| {
                    let best = algorithms
                        .iter()
                        .map(|&b| lookup(p, b))
                        .fold(f64::INFINITY, f64::min);
                    ratio(lookup(p, a), best)
                })
                .collect()
        })
        .collect();
    let taus = log_grid(opts.tau_max, opts.points);
    let np = problems.len() as f64;
    let rho = ratios
        .iter()
        .map(|rs| {
            taus.iter()
                .map(|&t| rs.iter().filter(|&&r| r <= t).count() as f64 / np)
                .collect()
        })
        .collect();
    Ok(Profile {
        algorithms,
        problems,
        taus,
        rho,
        ratios,
    })
}
