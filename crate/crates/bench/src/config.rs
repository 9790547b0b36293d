use std::path::Path;

use arclp::SolverConfig;

use crate::BenchError;

/// Per-problem wall-clock budget when the config does not set one.
pub const DEFAULT_TIME_LIMIT: f64 = 600.0;

/// Solver settings from a TOML file whose keys are the [`SolverConfig`]
/// fields; missing keys keep their defaults.
///
/// ```toml
/// epsilon = 1e-8
/// max_iterations = 150
///
/// [presolve_rules]
/// duplicate_rows = false
/// ```
pub fn load_config(path: &Path) -> Result<SolverConfig, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text).map_err(|message| BenchError::Config {
        path: path.to_path_buf(),
        message,
    })
}

pub fn parse_config(text: &str) -> Result<SolverConfig, String> {
    let mut cfg: SolverConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    if cfg.time_limit.is_none() {
        cfg.time_limit = Some(DEFAULT_TIME_LIMIT);
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

pub fn default_config() -> SolverConfig {
    SolverConfig {
        time_limit: Some(DEFAULT_TIME_LIMIT),
        ..SolverConfig::default()
    }
}
