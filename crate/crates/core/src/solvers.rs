//! Iteration drivers: the two arc-search methods and Mehrotra's
//! predictor-corrector, with shared starting point, termination and
//! presolve plumbing.

use std::collections::hash_map::DefaultHasher;
use std::f64::consts::FRAC_PI_2;
use std::hash::{Hash, Hasher};
use std::time::Instant;

use crate::arc::{self, ArcDerivatives};
use crate::kkt::{KktOptions, KktSolver, NormalEqFactor};
use crate::presolve::{self, PresolveOptions, PresolveResult, PresolveTrace};
use crate::problem::{
    composite_stop_metric, compute_residuals, duality_measure, Algorithm, Iterate, IterationRecord,
    SolveReport, SolveStatus, SolverConfig, StandardLp,
};
use crate::sparse::{dot, norm2};
use crate::Error;

/// A strictly positive primal-dual starting point.
#[derive(Clone, Debug, PartialEq)]
pub struct StartPoint {
    pub x: Vec<f64>,
    pub lambda: Vec<f64>,
    pub s: Vec<f64>,
}

impl StartPoint {
    /// Hash of the exact bit patterns of all entries.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for v in [&self.x, &self.lambda, &self.s] {
            v.len().hash(&mut h);
            for e in v.iter() {
                e.to_bits().hash(&mut h);
            }
        }
        h.finish()
    }

    fn is_valid(&self) -> bool {
        self.x.iter().chain(&self.s).all(|v| v.is_finite() && *v > 0.0)
            && self.lambda.iter().all(|v| v.is_finite())
    }
}

/// `max{‖Ax − b‖, ‖Aᵀλ + s − c‖, μ}` used to compare starting points.
pub fn start_metric(lp: &StandardLp, p: &StartPoint) -> Result<f64, Error> {
    let (rb, rc) = compute_residuals(lp, &p.x, &p.lambda, &p.s)?;
    let mu = duality_measure(&p.x, &p.s)?;
    Ok(norm2(&rb).max(norm2(&rc)).max(mu))
}

/// Mehrotra's least-squares heuristic: the minimum-norm solutions of the
/// equality systems, shifted into the positive orthant and balanced.
fn mehrotra_candidate(lp: &StandardLp) -> Result<StartPoint, Error> {
    let a = &lp.a;
    let mut kkt = KktSolver::new(
        a,
        KktOptions {
            refine: true,
            ..KktOptions::default()
        },
    );
    let f = kkt.factor(&vec![1.0; lp.ncols()])?;
    let y = kkt.solve(&f, &lp.b)?;
    let mut x = a.tr_mul_vec(&y);
    let lambda = kkt.solve(&f, &a.mul_vec(&lp.c))?;
    let atl = a.tr_mul_vec(&lambda);
    let mut s: Vec<f64> = lp.c.iter().zip(&atl).map(|(c, v)| c - v).collect();

    // a zero minimum would survive both shifts when xᵀs = 0
    let shift = |v: &mut Vec<f64>| {
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let d = if lo == 0.0 { 1.0 } else { f64::max(-1.5 * lo, 0.0) };
        v.iter_mut().for_each(|e| *e += d);
    };
    shift(&mut x);
    shift(&mut s);
    let xs = dot(&x, &s);
    let (sum_x, sum_s): (f64, f64) = (x.iter().sum(), s.iter().sum());
    let dx = 0.5 * xs / sum_s;
    let ds = 0.5 * xs / sum_x;
    x.iter_mut().for_each(|e| *e += dx);
    s.iter_mut().for_each(|e| *e += ds);
    Ok(StartPoint { x, lambda, s })
}

/// `x = s = ξe`, `λ = 0` with `ξ = max(1, ‖b‖∞/max(1, ‖A‖∞), ‖c‖∞)^½`.
fn scaled_ones_candidate(lp: &StandardLp) -> StartPoint {
    let b_inf = lp.b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let c_inf = lp.c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let xi = f64::max(1.0, b_inf / lp.a.norm_inf().max(1.0)).max(c_inf).sqrt();
    StartPoint {
        x: vec![xi; lp.ncols()],
        lambda: vec![0.0; lp.nrows()],
        s: vec![xi; lp.ncols()],
    }
}

/// Both starting-point candidates; an entry is `None` when the candidate is
/// not finite and strictly positive.
pub fn start_candidates(lp: &StandardLp) -> [Option<StartPoint>; 2] {
    let first = mehrotra_candidate(lp).ok().filter(StartPoint::is_valid);
    let second = Some(scaled_ones_candidate(lp)).filter(StartPoint::is_valid);
    [first, second]
}

/// The candidate with the smaller [`start_metric`].
pub fn initial_point(lp: &StandardLp) -> Result<StartPoint, Error> {
    if lp.ncols() == 0 {
        return Err(Error::Dimension("problem without columns".into()));
    }
    let mut best: Option<(f64, StartPoint)> = None;
    for p in start_candidates(lp).into_iter().flatten() {
        let metric = start_metric(lp, &p)?;
        if !metric.is_finite() {
            continue;
        }
        if best.as_ref().map_or(true, |(m, _)| metric < *m) {
            best = Some((metric, p));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::Numerical("no finite positive starting point".into()))
}

/// `α' = min(0.9999 α, 0.99 π/2)`
pub fn rescale_alpha(alpha: f64) -> f64 {
    f64::min(0.9999 * alpha, 0.99 * FRAC_PI_2)
}

/// Inputs to [`check_termination`], all measured at the current iterate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TerminationMetrics {
    pub composite: f64,
    pub mu: f64,
    /// Step sizes of the last step; `None` before the first step.
    pub alpha_x: Option<f64>,
    pub alpha_s: Option<f64>,
    pub rb_norm: f64,
    pub rc_norm: f64,
    pub prev_rb_norm: Option<f64>,
    pub prev_rc_norm: Option<f64>,
    /// Residual norms below these floors never count as growth.
    pub rb_floor: f64,
    pub rc_floor: f64,
    pub iteration: usize,
    pub elapsed: f64,
}

/// Stopping decision, `None` to continue.
pub fn check_termination(m: &TerminationMetrics, cfg: &SolverConfig) -> Option<SolveStatus> {
    if m.composite < cfg.epsilon {
        return Some(SolveStatus::Optimal);
    }
    if let (Some(ax), Some(as_)) = (m.alpha_x, m.alpha_s) {
        if ax < cfg.min_step && as_ < cfg.min_step {
            return Some(SolveStatus::StepTooSmall);
        }
    }
    let grew = |now: f64, prev: Option<f64>, floor: f64| prev.is_some_and(|p| now > 10.0 * p && now > floor);
    if grew(m.rb_norm, m.prev_rb_norm, m.rb_floor) || grew(m.rc_norm, m.prev_rc_norm, m.rc_floor) {
        return Some(SolveStatus::ResidualBlowup);
    }
    if m.mu < cfg.epsilon {
        return Some(SolveStatus::MuConverged);
    }
    if m.iteration >= cfg.max_iterations || cfg.time_limit.is_some_and(|t| m.elapsed >= t) {
        return Some(SolveStatus::IterationLimit);
    }
    None
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmState {
    pub iterate: Iterate,
    pub iteration: usize,
    /// Neighborhood constant (Arc1 only).
    pub theta: Option<f64>,
    pub history: Vec<IterationRecord>,
}

/// Diagnostics of one accepted step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepInfo {
    pub sigma: f64,
    pub alpha: f64,
    pub alpha_x: f64,
    pub alpha_s: f64,
    /// α chosen by the σ search before rescaling and backtracking.
    pub alpha_search: f64,
    pub backtracks: usize,
    pub sigma_widths: Vec<f64>,
    /// Mehrotra only: duality measure after the affine step.
    pub mu_affine: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StepResult {
    Accepted(AlgorithmState, StepInfo),
    /// No acceptable step; carries the largest step size that was tried.
    TooSmall {
        alpha_x: f64,
        alpha_s: f64,
    },
}

/// One problem, one configuration, one shared factorization object.
pub struct Solver<'a> {
    lp: &'a StandardLp,
    cfg: SolverConfig,
    kkt: KktSolver,
    started: Instant,
}

impl<'a> Solver<'a> {
    pub fn new(lp: &'a StandardLp, cfg: SolverConfig) -> Result<Self, Error> {
        cfg.validate()?;
        let opts = KktOptions {
            pivot_floor: cfg.regularization_pivot_floor,
            dense_threshold: cfg.dense_threshold,
            refine: cfg.refine_solves,
            drop_tiny_weights: cfg.degenerate_handling,
            ..KktOptions::default()
        };
        Ok(Solver {
            lp,
            kkt: KktSolver::new(&lp.a, opts),
            cfg,
            started: Instant::now(),
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn kkt(&self) -> &KktSolver {
        &self.kkt
    }

    pub fn numeric_factorizations(&self) -> usize {
        self.kkt.numeric_factorizations()
    }

    pub fn initial_state(&self, start: &StartPoint) -> Result<AlgorithmState, Error> {
        let iterate = Iterate::new(
            self.lp,
            start.x.clone(),
            start.lambda.clone(),
            start.s.clone(),
            1.0,
        )?;
        let theta = match self.cfg.algorithm {
            Algorithm::Arc1 => Some(self.cfg.theta_rule.evaluate(iterate.x(), iterate.s())),
            _ => None,
        };
        Ok(AlgorithmState {
            iterate,
            iteration: 0,
            theta,
            history: Vec::new(),
        })
    }

    fn factor_at(&mut self, it: &Iterate) -> Result<NormalEqFactor, Error> {
        self.kkt.factor(&arc::scaling_weights(it))
    }

    /// Factorization and derivatives at `it` (one numeric factorization).
    pub fn derivatives(&mut self, it: &Iterate) -> Result<ArcDerivatives, Error> {
        let f = self.factor_at(it)?;
        arc::arc_derivatives(self.lp, it, &self.kkt, &f)
    }

    pub fn step(&mut self, state: &AlgorithmState) -> Result<StepResult, Error> {
        match self.cfg.algorithm {
            Algorithm::Arc1 => self.step_algorithm1(state),
            Algorithm::Arc2 => self.step_algorithm2(state),
            Algorithm::MehrotraPC => self.step_mehrotra(state),
        }
    }

    /// One arc-search step that also keeps `x∘s ≥ θμ`.
    pub fn step_algorithm1(&mut self, state: &AlgorithmState) -> Result<StepResult, Error> {
        let theta = state
            .theta
            .ok_or_else(|| Error::Model("neighborhood constant θ is not set".into()))?;
        self.arc_step(state, Some(theta))
    }

    /// One arc-search step that only keeps iterates positive.
    pub fn step_algorithm2(&mut self, state: &AlgorithmState) -> Result<StepResult, Error> {
        self.arc_step(state, None)
    }

    fn arc_step(&mut self, state: &AlgorithmState, theta: Option<f64>) -> Result<StepResult, Error> {
        let it = &state.iterate;
        let d = self.derivatives(it)?;
        let th = arc::thresholds(it, self.cfg.rho);
        let sel = arc::select_sigma_alpha(
            it,
            &d,
            th,
            self.cfg.sigma_min,
            self.cfg.sigma_max(),
            self.cfg.bisection_tol,
        );
        let sigma = sel.sigma;
        let mut alpha = rescale_alpha(sel.alpha);
        let mut backtracks = 0;
        loop {
            if alpha < self.cfg.min_step {
                return Ok(StepResult::TooSmall {
                    alpha_x: alpha,
                    alpha_s: alpha,
                });
            }
            let (x, lambda, s) = arc::ellipse_point(it, &d, sigma, alpha);
            if let Some(next) = self.accept_arc(it, x, lambda, s, alpha, theta)? {
                let blocks = arc::step_lengths(it, &d, th, sigma);
                let info = StepInfo {
                    sigma,
                    alpha,
                    alpha_x: blocks.alpha_x,
                    alpha_s: blocks.alpha_s,
                    alpha_search: sel.alpha,
                    backtracks,
                    sigma_widths: sel.widths,
                    mu_affine: None,
                };
                return Ok(StepResult::Accepted(self.advance(state, next, &info), info));
            }
            if backtracks >= self.cfg.backtrack_limit {
                return Ok(StepResult::TooSmall {
                    alpha_x: alpha,
                    alpha_s: alpha,
                });
            }
            alpha *= 0.5;
            backtracks += 1;
        }
    }

    fn accept_arc(
        &self,
        it: &Iterate,
        x: Vec<f64>,
        lambda: Vec<f64>,
        s: Vec<f64>,
        alpha: f64,
        theta: Option<f64>,
    ) -> Result<Option<Iterate>, Error> {
        if x.iter().chain(&s).any(|v| !(*v > 0.0)) {
            return Ok(None);
        }
        let nu = it.nu() * (1.0 - alpha.sin());
        let next = Iterate::new(self.lp, x, lambda, s, nu)?;
        if !(next.mu() < it.mu()) {
            return Ok(None);
        }
        if let Some(theta) = theta {
            if next.min_complementarity() < theta * next.mu() {
                return Ok(None);
            }
        }
        Ok(Some(next))
    }

    fn advance(&self, state: &AlgorithmState, next: Iterate, info: &StepInfo) -> AlgorithmState {
        let mut history = state.history.clone();
        history.push(IterationRecord {
            mu: next.mu(),
            rb_norm: norm2(next.r_b()),
            rc_norm: norm2(next.r_c()),
            alpha: info.alpha,
            alpha_x: info.alpha_x,
            alpha_s: info.alpha_s,
            sigma: info.sigma,
            nu: next.nu(),
            proximity: next.min_complementarity() / next.mu(),
            wall_time: self.started.elapsed().as_secs_f64(),
        });
        AlgorithmState {
            iterate: next,
            iteration: state.iteration + 1,
            theta: state.theta,
            history,
        }
    }

    /// One predictor-corrector step with separate primal and dual step
    /// lengths.
    pub fn step_mehrotra(&mut self, state: &AlgorithmState) -> Result<StepResult, Error> {
        let it = &state.iterate;
        let (x, s, mu) = (it.x(), it.s(), it.mu());
        let n = x.len();
        let f = self.factor_at(it)?;
        let (xdot, _, sdot) = arc::first_derivatives(self.lp, it, &self.kkt, &f)?;
        let dx_aff: Vec<f64> = xdot.iter().map(|v| -v).collect();
        let ds_aff: Vec<f64> = sdot.iter().map(|v| -v).collect();
        let ap_aff = max_line_step(x, &dx_aff).min(1.0);
        let ad_aff = max_line_step(s, &ds_aff).min(1.0);
        let mu_aff = (0..n)
            .map(|i| (x[i] + ap_aff * dx_aff[i]) * (s[i] + ad_aff * ds_aff[i]))
            .sum::<f64>()
            / n as f64;
        let sigma = (mu_aff / mu).powi(3);

        let a = self.kkt.matrix();
        let d2 = f.weights();
        let scale = self.cfg.mehrotra_step_scale;
        // S Δx + X Δs = −x∘s − Δx_aff∘Δs_aff + σμe
        let combined = |second_order: bool| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, f64, f64), Error> {
            let sig = sigma.min(1.0);
            let r3: Vec<f64> = (0..n)
                .map(|i| {
                    let corr = if second_order { dx_aff[i] * ds_aff[i] } else { 0.0 };
                    -x[i] * s[i] - corr + sig * mu
                })
                .collect();
            let t: Vec<f64> = (0..n).map(|i| r3[i] / s[i] + d2[i] * it.r_c()[i]).collect();
            let rhs: Vec<f64> = a
                .mul_vec(&t)
                .iter()
                .zip(it.r_b())
                .map(|(v, rb)| -rb - v)
                .collect();
            let dl = self.kkt.solve(&f, &rhs)?;
            let atdl = a.tr_mul_vec(&dl);
            let ds: Vec<f64> = (0..n).map(|i| -it.r_c()[i] - atdl[i]).collect();
            let dx: Vec<f64> = (0..n).map(|i| r3[i] / s[i] - d2[i] * ds[i]).collect();
            let ap = (scale * max_line_step(x, &dx)).min(1.0);
            let ad = (scale * max_line_step(s, &ds)).min(1.0);
            Ok((dx, dl, ds, ap, ad))
        };
        let (mut dx, mut dl, mut ds, mut ap, mut ad) = combined(true)?;
        if ap.min(ad) < 0.5 * ap_aff.min(ad_aff) {
            let plain = combined(false)?;
            if plain.3.min(plain.4) > ap.min(ad) {
                (dx, dl, ds, ap, ad) = plain;
            }
        }
        if ap < self.cfg.min_step && ad < self.cfg.min_step {
            return Ok(StepResult::TooSmall {
                alpha_x: ap,
                alpha_s: ad,
            });
        }
        let xn: Vec<f64> = (0..n).map(|i| x[i] + ap * dx[i]).collect();
        let sn: Vec<f64> = (0..n).map(|i| s[i] + ad * ds[i]).collect();
        let ln: Vec<f64> = it.lambda().iter().zip(&dl).map(|(l, d)| l + ad * d).collect();
        let next = match Iterate::new(self.lp, xn, ln, sn, it.nu()) {
            Ok(next) => next,
            Err(Error::Numerical(_)) => {
                return Ok(StepResult::TooSmall {
                    alpha_x: 0.0,
                    alpha_s: 0.0,
                })
            }
            Err(e) => return Err(e),
        };
        let info = StepInfo {
            sigma,
            alpha: ap.min(ad),
            alpha_x: ap,
            alpha_s: ad,
            alpha_search: ap.min(ad),
            backtracks: 0,
            sigma_widths: Vec::new(),
            mu_affine: Some(mu_aff),
        };
        Ok(StepResult::Accepted(self.advance(state, next, &info), info))
    }

    fn metrics(
        &self,
        state: &AlgorithmState,
        prev: Option<&Iterate>,
        last: Option<(f64, f64)>,
    ) -> TerminationMetrics {
        let it = &state.iterate;
        TerminationMetrics {
            composite: composite_stop_metric(self.lp, it),
            mu: it.mu(),
            alpha_x: last.map(|l| l.0),
            alpha_s: last.map(|l| l.1),
            rb_norm: norm2(it.r_b()),
            rc_norm: norm2(it.r_c()),
            prev_rb_norm: prev.map(|p| norm2(p.r_b())),
            prev_rc_norm: prev.map(|p| norm2(p.r_c())),
            rb_floor: self.cfg.epsilon * norm2(&self.lp.b).max(1.0),
            rc_floor: self.cfg.epsilon * norm2(&self.lp.c).max(1.0),
            iteration: state.iteration,
            elapsed: self.started.elapsed().as_secs_f64(),
        }
    }

    /// Iterates from `start` until a stopping rule fires.
    pub fn run(&mut self, start: &StartPoint) -> Result<(AlgorithmState, SolveStatus), Error> {
        self.started = Instant::now();
        let mut state = self.initial_state(start)?;
        let mut prev: Option<Iterate> = None;
        let mut last: Option<(f64, f64)> = None;
        loop {
            if let Some(status) = check_termination(&self.metrics(&state, prev.as_ref(), last), &self.cfg) {
                return Ok((state, status));
            }
            let result = match self.step(&state) {
                Ok(r) => r,
                Err(Error::Numerical(msg)) => {
                    log::warn!("numerical failure at iteration {}: {msg}", state.iteration);
                    return Ok((state, SolveStatus::NumericalFailure));
                }
                Err(e) => return Err(e),
            };
            match result {
                StepResult::Accepted(next, info) => {
                    log::debug!(
                        "iter {:3}  mu {:.3e}  sigma {:.3e}  alpha {:.4}",
                        next.iteration,
                        next.iterate.mu(),
                        info.sigma,
                        info.alpha
                    );
                    last = Some((info.alpha_x, info.alpha_s));
                    prev = Some(std::mem::replace(&mut state, next).iterate);
                }
                StepResult::TooSmall { alpha_x, alpha_s } => {
                    last = Some((alpha_x, alpha_s));
                    let m = self.metrics(&state, prev.as_ref(), last);
                    let status = check_termination(&m, &self.cfg).unwrap_or(SolveStatus::StepTooSmall);
                    return Ok((state, status));
                }
            }
        }
    }
}

/// Largest `t ≥ 0` with `v + t·dv ≥ 0` (infinite if no entry decreases).
fn max_line_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

/// A problem after presolve, with the starting point all algorithms share.
#[derive(Clone, Debug)]
pub enum Prepared {
    Ready {
        original: StandardLp,
        reduced: StandardLp,
        trace: Option<PresolveTrace>,
        start: Option<StartPoint>,
    },
    /// Presolve settled the problem.
    Decided { status: SolveStatus, reason: String },
}

impl Prepared {
    pub fn start(&self) -> Option<&StartPoint> {
        match self {
            Prepared::Ready { start, .. } => start.as_ref(),
            Prepared::Decided { .. } => None,
        }
    }

    pub fn reduced(&self) -> Option<&StandardLp> {
        match self {
            Prepared::Ready { reduced, .. } => Some(reduced),
            Prepared::Decided { .. } => None,
        }
    }
}

pub fn prepare(lp: &StandardLp, cfg: &SolverConfig) -> Result<Prepared, Error> {
    let (reduced, trace) = if cfg.presolve_enabled {
        let opts = PresolveOptions {
            rules: cfg.presolve_rules,
            scaling_ratio_threshold: cfg.scaling_ratio_threshold,
        };
        match presolve::presolve(lp, &opts)? {
            PresolveResult::Reduced { lp: reduced, trace } => (reduced, Some(trace)),
            PresolveResult::Infeasible(reason) => {
                return Ok(Prepared::Decided {
                    status: SolveStatus::Infeasible,
                    reason,
                })
            }
            PresolveResult::Unbounded(reason) => {
                return Ok(Prepared::Decided {
                    status: SolveStatus::Unbounded,
                    reason,
                })
            }
        }
    } else {
        (lp.clone(), None)
    };
    let start = if reduced.ncols() > 0 {
        Some(initial_point(&reduced)?)
    } else {
        None
    };
    Ok(Prepared::Ready {
        original: lp.clone(),
        reduced,
        trace,
        start,
    })
}

/// Runs `cfg.algorithm` on a prepared problem and maps the result back to
/// the original variables.
pub fn solve_prepared(prepared: &Prepared, cfg: &SolverConfig) -> Result<SolveReport, Error> {
    let t0 = Instant::now();
    let (original, reduced, trace, start) = match prepared {
        Prepared::Decided { status, reason } => {
            log::info!("presolve: {reason}");
            return Ok(SolveReport {
                status: *status,
                algorithm: cfg.algorithm,
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
                solve_time: t0.elapsed().as_secs_f64(),
            });
        }
        Prepared::Ready {
            original,
            reduced,
            trace,
            start,
        } => (original, reduced, trace, start),
    };

    let (status, iterations, history, theta, factorizations, composite, xr, lr, sr) = match start {
        None => (
            SolveStatus::Optimal,
            0,
            Vec::new(),
            None,
            0,
            0.0,
            Vec::new(),
            vec![0.0; reduced.nrows()],
            Vec::new(),
        ),
        Some(start) => {
            let mut solver = Solver::new(reduced, cfg.clone())?;
            let (state, status) = solver.run(start)?;
            let composite = composite_stop_metric(reduced, &state.iterate);
            let factorizations = solver.numeric_factorizations();
            let (x, l, s) = state.iterate.into_parts();
            (
                status,
                state.iteration,
                state.history,
                state.theta,
                factorizations,
                composite,
                x,
                l,
                s,
            )
        }
    };

    let (x, lambda, s) = match trace {
        Some(trace) => presolve::postsolve(trace, &xr, &lr, &sr)?,
        None => (xr, lr, sr),
    };
    Ok(SolveReport {
        status,
        algorithm: cfg.algorithm,
        iterations,
        per_iteration: history,
        objective_primal: original.primal_objective(&x) + original.offset,
        objective_dual: original.dual_objective(&lambda) + original.offset,
        composite_metric: composite,
        theta,
        factorizations,
        x,
        lambda,
        s,
        solve_time: t0.elapsed().as_secs_f64(),
    })
}

/// Presolve, choose a starting point, iterate and postsolve.
pub fn solve(lp: &StandardLp, cfg: &SolverConfig) -> Result<SolveReport, Error> {
    cfg.validate()?;
    solve_prepared(&prepare(lp, cfg)?, cfg)
}

/// Iterates on `lp` as given (no presolve) from `start`.
pub fn solve_from(lp: &StandardLp, cfg: &SolverConfig, start: &StartPoint) -> Result<SolveReport, Error> {
    let prepared = Prepared::Ready {
        original: lp.clone(),
        reduced: lp.clone(),
        trace: None,
        start: Some(start.clone()),
    };
    solve_prepared(&prepared, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn metrics() -> TerminationMetrics {
        TerminationMetrics {
            composite: 1.0,
            mu: 1.0,
            alpha_x: Some(0.5),
            alpha_s: Some(0.5),
            rb_norm: 1.0,
            rc_norm: 1.0,
            prev_rb_norm: Some(1.0),
            prev_rc_norm: Some(1.0),
            rb_floor: 1e-8,
            rc_floor: 1e-8,
            iteration: 3,
            elapsed: 0.0,
        }
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(rescale_alpha(FRAC_PI_2), 0.99 * FRAC_PI_2);
        assert!((rescale_alpha(0.1) - 0.09999).abs() < 1e-16);
        assert!(rescale_alpha(FRAC_PI_2).sin() < 1.0);
    }

    #[test]
    fn termination_table() {
        let cfg = SolverConfig::default();
        assert_eq!(check_termination(&metrics(), &cfg), None);
        let cases = [
            (
                TerminationMetrics {
                    composite: 0.0,
                    mu: 0.0,
                    ..metrics()
                },
                Some(SolveStatus::Optimal),
            ),
            (
                TerminationMetrics {
                    alpha_x: Some(1e-9),
                    alpha_s: Some(1e-9),
                    ..metrics()
                },
                Some(SolveStatus::StepTooSmall),
            ),
            (
                TerminationMetrics {
                    alpha_x: Some(1e-9),
                    ..metrics()
                },
                None,
            ),
            (
                TerminationMetrics {
                    rb_norm: 20.0,
                    ..metrics()
                },
                Some(SolveStatus::ResidualBlowup),
            ),
            (
                TerminationMetrics {
                    rc_norm: 10.5,
                    ..metrics()
                },
                Some(SolveStatus::ResidualBlowup),
            ),
            (
                TerminationMetrics {
                    rb_norm: 1e-9,
                    prev_rb_norm: Some(1e-12),
                    ..metrics()
                },
                None,
            ),
            (
                TerminationMetrics {
                    mu: 1e-9,
                    ..metrics()
                },
                Some(SolveStatus::MuConverged),
            ),
            (
                TerminationMetrics {
                    iteration: 200,
                    ..metrics()
                },
                Some(SolveStatus::IterationLimit),
            ),
        ];
        for (m, want) in cases {
            assert_eq!(check_termination(&m, &cfg), want, "{m:?}");
        }
    }

    #[test]
    fn trivial_lp_is_solved() {
        // min x  s.t.  x = 1
        let lp = StandardLp::from_dense(&[vec![1.0]], &[1.0], &[1.0]).unwrap();
        for alg in [Algorithm::Arc1, Algorithm::Arc2, Algorithm::MehrotraPC] {
            let cfg = SolverConfig {
                presolve_enabled: false,
                ..SolverConfig::for_algorithm(alg)
            };
            let r = solve(&lp, &cfg).unwrap();
            assert_eq!(r.status, SolveStatus::Optimal, "{alg}");
            assert!((r.objective_primal - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn start_point_is_positive() {
        let lp = StandardLp::from_dense(
            &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            &[1.0, 1.0, 1.0],
            &[1.0, 1.0, 1.0],
        )
        .unwrap();
        let p = initial_point(&lp).unwrap();
        assert!(p.x.iter().chain(&p.s).all(|v| *v > 0.0));
        let metrics: Vec<f64> = start_candidates(&lp)
            .iter()
            .flatten()
            .map(|c| start_metric(&lp, c).unwrap())
            .collect();
        let chosen = start_metric(&lp, &p).unwrap();
        assert!(metrics.iter().all(|m| chosen <= *m));
    }
}
