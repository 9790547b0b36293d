//! Shared data model: standard-form problems, primal-dual iterates, solver
//! configuration and solve reports.

use serde::{Deserialize, Serialize};

use crate::presolve::RuleSet;
use crate::sparse::{dot, norm2, CscMatrix};
use crate::Error;

/// `min cᵀx  s.t.  Ax = b, x ≥ 0`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardLp {
    pub a: CscMatrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    /// Constant added to `cᵀx` to obtain the objective of the source model.
    pub offset: f64,
    pub row_names: Option<Vec<String>>,
    pub col_names: Option<Vec<String>>,
}

impl StandardLp {
    pub fn new(a: CscMatrix, b: Vec<f64>, c: Vec<f64>) -> Result<Self, Error> {
        if a.nrows() != b.len() || a.ncols() != c.len() {
            return Err(Error::Dimension(format!(
                "A is {}x{}, b has {}, c has {}",
                a.nrows(),
                a.ncols(),
                b.len(),
                c.len()
            )));
        }
        if b.iter().chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite entry in b or c".into()));
        }
        Ok(StandardLp {
            a,
            b,
            c,
            offset: 0.0,
            row_names: None,
            col_names: None,
        })
    }

    pub fn from_dense(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<Self, Error> {
        Self::new(CscMatrix::from_dense(a)?, b.to_vec(), c.to_vec())
    }

    pub fn nrows(&self) -> usize {
        self.a.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.a.ncols()
    }

    pub fn primal_objective(&self, x: &[f64]) -> f64 {
        dot(&self.c, x)
    }

    pub fn dual_objective(&self, lambda: &[f64]) -> f64 {
        dot(&self.b, lambda)
    }
}

/// `r_b = Ax − b`, `r_c = Aᵀλ + s − c`.
pub fn compute_residuals(
    lp: &StandardLp,
    x: &[f64],
    lambda: &[f64],
    s: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), Error> {
    let (m, n) = (lp.nrows(), lp.ncols());
    if x.len() != n || s.len() != n || lambda.len() != m {
        return Err(Error::Dimension(format!(
            "point (x: {}, λ: {}, s: {}) does not fit a {m}x{n} problem",
            x.len(),
            lambda.len(),
            s.len()
        )));
    }
    let mut r_b = lp.a.mul_vec(x);
    for (r, b) in r_b.iter_mut().zip(&lp.b) {
        *r -= b;
    }
    let mut r_c = lp.a.tr_mul_vec(lambda);
    for ((r, si), ci) in r_c.iter_mut().zip(s).zip(&lp.c) {
        *r += si - ci;
    }
    Ok((r_b, r_c))
}

/// `μ = xᵀs / n`
pub fn duality_measure(x: &[f64], s: &[f64]) -> Result<f64, Error> {
    if x.is_empty() || x.len() != s.len() {
        return Err(Error::Dimension(format!(
            "duality measure of vectors with lengths {} and {}",
            x.len(),
            s.len()
        )));
    }
    Ok(dot(x, s) / x.len() as f64)
}

/// The composite relative stopping measure
/// `‖r_b‖/max{1,‖b‖} + ‖r_c‖/max{1,‖c‖} + μ/max{1,|cᵀx|,|bᵀλ|}`.
pub fn composite_stop_metric(lp: &StandardLp, it: &Iterate) -> f64 {
    let pobj = lp.primal_objective(&it.x).abs();
    let dobj = lp.dual_objective(&it.lambda).abs();
    norm2(&it.r_b) / norm2(&lp.b).max(1.0)
        + norm2(&it.r_c) / norm2(&lp.c).max(1.0)
        + it.mu / pobj.max(dobj).max(1.0)
}

/// A primal-dual point with its residuals, duality measure and residual
/// decay factor `ν`.
///
/// Construction always recomputes `r_b`, `r_c` and `μ` from the point, so a
/// value of this type never carries stale caches.
#[derive(Clone, Debug, PartialEq)]
pub struct Iterate {
    x: Vec<f64>,
    lambda: Vec<f64>,
    s: Vec<f64>,
    r_b: Vec<f64>,
    r_c: Vec<f64>,
    mu: f64,
    nu: f64,
}

impl Iterate {
    pub fn new(lp: &StandardLp, x: Vec<f64>, lambda: Vec<f64>, s: Vec<f64>, nu: f64) -> Result<Self, Error> {
        let (r_b, r_c) = compute_residuals(lp, &x, &lambda, &s)?;
        if let Some(i) = x.iter().chain(&s).position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::Numerical(format!(
                "iterate is not strictly positive (component {i})"
            )));
        }
        if lambda.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite multiplier".into()));
        }
        if !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::Numerical(format!("decay factor ν = {nu} outside (0, 1]")));
        }
        let mu = duality_measure(&x, &s)?;
        Ok(Iterate {
            x,
            lambda,
            s,
            r_b,
            r_c,
            mu,
            nu,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn r_b(&self) -> &[f64] {
        &self.r_b
    }

    pub fn r_c(&self) -> &[f64] {
        &self.r_c
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// `min_i xᵢsᵢ`
    pub fn min_complementarity(&self) -> f64 {
        self.x
            .iter()
            .zip(&self.s)
            .map(|(x, s)| x * s)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn into_parts(self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        (self.x, self.lambda, self.s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Algorithm {
    /// Arc search inside the `xᵢsᵢ ≥ θμ` neighborhood.
    Arc1,
    /// Arc search inside the positive orthant only.
    Arc2,
    /// Mehrotra's predictor-corrector line search.
    MehrotraPC,
}

impl Algorithm {
    pub fn short_name(self) -> &'static str {
        match self {
            Algorithm::Arc1 => "arc1",
            Algorithm::Arc2 => "arc2",
            Algorithm::MehrotraPC => "mpc",
        }
    }

    pub fn default_sigma_max(self) -> f64 {
        match self {
            Algorithm::Arc1 => 0.4,
            Algorithm::Arc2 => 0.3,
            Algorithm::MehrotraPC => 1.0,
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.short_name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "arc1" => Ok(Algorithm::Arc1),
            "arc2" => Ok(Algorithm::Arc2),
            "mpc" | "mehrotra" | "mehrotrapc" => Ok(Algorithm::MehrotraPC),
            other => Err(Error::Model(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// How the neighborhood constant θ is chosen once the initial point is known.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum ThetaRule {
    /// `θ = min{10⁻⁶, 0.1·min(x⁰∘s⁰)/μ₀}`
    FromInitialPoint,
    Fixed(f64),
}

impl ThetaRule {
    pub fn evaluate(self, x0: &[f64], s0: &[f64]) -> f64 {
        match self {
            ThetaRule::Fixed(theta) => theta,
            ThetaRule::FromInitialPoint => {
                let n = x0.len() as f64;
                let mu0 = dot(x0, s0) / n;
                let min_xs = x0
                    .iter()
                    .zip(s0)
                    .map(|(x, s)| x * s)
                    .fold(f64::INFINITY, f64::min);
                f64::min(1e-6, 0.1 * min_xs / mu0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub epsilon: f64,
    pub sigma_min: f64,
    /// `None` selects the per-algorithm default (0.4 for Arc1, 0.3 for Arc2).
    pub sigma_max: Option<f64>,
    pub rho: f64,
    pub theta_rule: ThetaRule,
    pub max_iterations: usize,
    /// Stop the σ bisection once the bracket is this narrow.
    pub bisection_tol: f64,
    /// Pivots below this multiple of their own diagonal entry are
    /// regularized away.
    pub regularization_pivot_floor: f64,
    pub presolve_enabled: bool,
    pub presolve_rules: RuleSet,
    pub scaling_ratio_threshold: f64,
    /// Step sizes below this count as a failed search direction.
    pub min_step: f64,
    /// Maximum number of α halvings when enforcing μ decrease and proximity.
    pub backtrack_limit: usize,
    /// Fraction-to-the-boundary factor for Mehrotra's line search.
    pub mehrotra_step_scale: f64,
    /// Use the dense normal-equations factorization up to this many rows.
    pub dense_threshold: usize,
    /// One step of iterative refinement on every normal-equations solve.
    pub refine_solves: bool,
    /// Drop nearly binding columns from the normal equations.
    pub degenerate_handling: bool,
    /// Wall-clock budget in seconds.
    pub time_limit: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            algorithm: Algorithm::Arc2,
            epsilon: 1e-8,
            sigma_min: 1e-6,
            sigma_max: None,
            rho: 0.01,
            theta_rule: ThetaRule::FromInitialPoint,
            max_iterations: 200,
            bisection_tol: 1e-8,
            regularization_pivot_floor: 1e-12,
            presolve_enabled: true,
            presolve_rules: RuleSet::default(),
            scaling_ratio_threshold: 1e8,
            min_step: 1e-8,
            backtrack_limit: 30,
            mehrotra_step_scale: 0.9995,
            dense_threshold: 200,
            refine_solves: true,
            degenerate_handling: false,
            time_limit: None,
        }
    }
}

impl SolverConfig {
    pub fn for_algorithm(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            ..Default::default()
        }
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
            .unwrap_or_else(|| self.algorithm.default_sigma_max())
    }

    pub fn validate(&self) -> Result<(), Error> {
        let sigma_max = self.sigma_max();
        if !(0.0 < self.sigma_min && self.sigma_min < sigma_max && sigma_max <= 1.0) {
            return Err(Error::Model(format!(
                "need 0 < σ_min < σ_max ≤ 1, got σ_min = {}, σ_max = {sigma_max}",
                self.sigma_min
            )));
        }
        if !(0.0 < self.rho && self.rho < 1.0) {
            return Err(Error::Model(format!("ρ = {} outside (0, 1)", self.rho)));
        }
        if !(0.0 < self.epsilon && self.epsilon < 1.0) {
            return Err(Error::Model(format!("ε = {} outside (0, 1)", self.epsilon)));
        }
        if !(self.bisection_tol > 0.0) {
            return Err(Error::Model("bisection tolerance must be positive".into()));
        }
        if let ThetaRule::Fixed(theta) = self.theta_rule {
            if !(0.0 < theta && theta < 1.0) {
                return Err(Error::Model(format!("θ = {theta} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    StepTooSmall,
    ResidualBlowup,
    MuConverged,
    IterationLimit,
    NumericalFailure,
    /// Presolve proved the primal problem infeasible.
    Infeasible,
    /// Presolve proved the primal objective unbounded below.
    Unbounded,
}

impl SolveStatus {
    pub fn is_optimal(self) -> bool {
        self == SolveStatus::Optimal
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

impl std::str::FromStr for SolveStatus {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Ok(match s {
            "Optimal" => SolveStatus::Optimal,
            "StepTooSmall" => SolveStatus::StepTooSmall,
            "ResidualBlowup" => SolveStatus::ResidualBlowup,
            "MuConverged" => SolveStatus::MuConverged,
            "IterationLimit" => SolveStatus::IterationLimit,
            "NumericalFailure" => SolveStatus::NumericalFailure,
            "Infeasible" => SolveStatus::Infeasible,
            "Unbounded" => SolveStatus::Unbounded,
            other => return Err(Error::Model(format!("unknown status '{other}'"))),
        })
    }
}

/// Metrics of one accepted iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub mu: f64,
    pub rb_norm: f64,
    pub rc_norm: f64,
    /// Accepted step (angle for the arc methods, primal step for Mehrotra).
    pub alpha: f64,
    pub alpha_x: f64,
    pub alpha_s: f64,
    pub sigma: f64,
    pub nu: f64,
    /// `min_i xᵢsᵢ / μ` after the step.
    pub proximity: f64,
    /// Seconds since the start of the solve.
    pub wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub per_iteration: Vec<IterationRecord>,
    pub objective_primal: f64,
    pub objective_dual: f64,
    pub composite_metric: f64,
    /// Neighborhood constant (Arc1 only).
    pub theta: Option<f64>,
    /// Numeric normal-equations factorizations performed by the iterations.
    pub factorizations: usize,
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
    pub solve_time: f64,
}
