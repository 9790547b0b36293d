//! Benchmark harness for the arclp solvers: single runs, suites over a
//! directory of MPS files, CSV records and performance profiles.

pub mod config;
pub mod profile;
pub mod record;
pub mod suite;

mod error;

pub use config::{default_config, load_config, parse_config};
pub use error::BenchError;
pub use profile::{performance_profile, Metric, Profile, ProfileOptions};
pub use record::{read_records, write_records, BenchRecord};
pub use suite::{load_problem, run_files, run_single, run_suite, LoadedProblem, SingleRun, SuiteOutcome};
