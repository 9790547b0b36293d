//! Arc-search infeasible interior-point methods for linear programming.
//!
//! The crate solves standard-form problems
//!
//! ```text
//! min cᵀx  s.t.  Ax = b, x ≥ 0        max bᵀλ  s.t.  Aᵀλ + s = c, s ≥ 0
//! ```
//!
//! with three drivers that share one normal-equations factorization per
//! iteration:
//!
//! * [`Algorithm::Arc1`] keeps every iterate in the neighborhood
//!   `xᵢsᵢ ≥ θμ` while searching along an ellipse,
//! * [`Algorithm::Arc2`] only keeps iterates positive,
//! * [`Algorithm::MehrotraPC`] is the classic predictor-corrector baseline.
//!
//! Problems come from MPS files via [`mps`]. [`solvers::solve`] runs
//! [`presolve`] before iterating and maps the answer back.

pub mod arc;
pub mod kkt;
pub mod mps;
pub mod presolve;
pub mod problem;
pub mod solvers;
pub mod sparse;

mod error;

pub use error::Error;
pub use problem::{
    composite_stop_metric, compute_residuals, duality_measure, Algorithm, Iterate, IterationRecord,
    SolveReport, SolveStatus, SolverConfig, StandardLp, ThetaRule,
};
pub use sparse::CscMatrix;
