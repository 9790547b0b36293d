//! Reductions applied to a standard-form problem before solving, and the
//! reverse mapping from a reduced solution to the original variables.
//!
//! Every reduction only deactivates rows and columns and adjusts `b`, `c`
//! and the objective offset, so the constraint values themselves are never
//! rewritten. The rules run to a fixpoint, which makes the procedure
//! idempotent on its own output.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::problem::StandardLp;
use crate::sparse::CscMatrix;
use crate::Error;

/// Toggles for the individual reductions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleSet {
    pub zero_rows: bool,
    pub zero_columns: bool,
    pub row_singletons: bool,
    pub duplicate_rows: bool,
    pub free_column_singletons: bool,
}

impl Default for RuleSet {
    fn default() -> Self {
        RuleSet {
            zero_rows: true,
            zero_columns: true,
            row_singletons: true,
            duplicate_rows: true,
            free_column_singletons: true,
        }
    }
}

impl RuleSet {
    pub fn none() -> Self {
        RuleSet {
            zero_rows: false,
            zero_columns: false,
            row_singletons: false,
            duplicate_rows: false,
            free_column_singletons: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PresolveOptions {
    pub rules: RuleSet,
    /// Above this `max|a| / min|a|` ratio, duplicate rows are matched with a
    /// looser tolerance.
    pub scaling_ratio_threshold: f64,
}

impl Default for PresolveOptions {
    fn default() -> Self {
        PresolveOptions {
            rules: RuleSet::default(),
            scaling_ratio_threshold: 1e8,
        }
    }
}

const FEAS_TOL: f64 = 1e-9;
const DUP_TOL: f64 = 1e-12;
const DUP_TOL_BADLY_SCALED: f64 = 1e-9;

/// `max |a_ij| / min_{a_ij ≠ 0} |a_ij|`, or 1 for a matrix without entries.
pub fn scaling_ratio(a: &CscMatrix) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for v in a.values() {
        lo = lo.min(v.abs());
        hi = hi.max(v.abs());
    }
    if hi == 0.0 {
        1.0
    } else {
        hi / lo
    }
}

/// One applied reduction, in application order.
#[derive(Clone, Debug, PartialEq)]
pub enum Reduction {
    /// Row without active entries and zero right-hand side.
    ZeroRow { row: usize },
    /// Column without active entries and nonnegative cost, fixed at 0.
    ZeroColumn { col: usize },
    /// Row with a single active entry fixing `x_col = value`.
    RowSingleton { row: usize, col: usize, value: f64 },
    /// Row proportional to `of` with a consistent right-hand side.
    DuplicateRow { row: usize, of: usize },
    /// Column whose only active entry sits in `row` and whose bound is
    /// implied by the row; the row is used to eliminate it.
    FreeColumnSingleton {
        row: usize,
        col: usize,
        pivot: f64,
        rhs: f64,
        cost: f64,
        others: Vec<(usize, f64)>,
    },
}

/// What [`postsolve`] needs to map a reduced solution back.
#[derive(Clone, Debug, PartialEq)]
pub struct PresolveTrace {
    pub reductions: Vec<Reduction>,
    pub kept_rows: Vec<usize>,
    pub kept_cols: Vec<usize>,
    original_a: CscMatrix,
    original_c: Vec<f64>,
}

impl PresolveTrace {
    pub fn original_dims(&self) -> (usize, usize) {
        (self.original_a.nrows(), self.original_a.ncols())
    }

    pub fn is_identity(&self) -> bool {
        self.reductions.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PresolveResult {
    Reduced { lp: StandardLp, trace: PresolveTrace },
    Infeasible(String),
    Unbounded(String),
}

struct Work<'a> {
    lp: &'a StandardLp,
    rows: CscMatrix,
    row_alive: Vec<bool>,
    col_alive: Vec<bool>,
    b: Vec<f64>,
    c: Vec<f64>,
    offset: f64,
    reductions: Vec<Reduction>,
}

impl<'a> Work<'a> {
    fn active_col(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (ri, v) = self.lp.a.col(j);
        ri.iter()
            .zip(v)
            .filter(move |(i, _)| self.row_alive[**i])
            .map(|(&i, &v)| (i, v))
    }

    fn active_row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (cj, v) = self.rows.col(i);
        cj.iter()
            .zip(v)
            .filter(move |(j, _)| self.col_alive[**j])
            .map(|(&j, &v)| (j, v))
    }

    fn fix_column(&mut self, j: usize, value: f64) {
        if value != 0.0 {
            let entries: Vec<(usize, f64)> = self.active_col(j).collect();
            for (i, a) in entries {
                self.b[i] -= a * value;
            }
            self.offset += self.c[j] * value;
        }
        self.col_alive[j] = false;
    }

    fn current_scaling_ratio(&self) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for j in (0..self.col_alive.len()).filter(|&j| self.col_alive[j]) {
            for (_, v) in self.active_col(j) {
                lo = lo.min(v.abs());
                hi = hi.max(v.abs());
            }
        }
        if hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }
}

/// The single item of an iterator, if it yields exactly one.
fn only<I: Iterator>(mut it: I) -> Option<I::Item> {
    match (it.next(), it.next()) {
        (Some(x), None) => Some(x),
        _ => None,
    }
}

enum Verdict {
    Changed(bool),
    Infeasible(String),
    Unbounded(String),
}

fn zero_rows(w: &mut Work) -> Verdict {
    let mut changed = false;
    let scale = w.b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..w.b.len() {
        if w.row_alive[i] && w.active_row(i).next().is_none() {
            if w.b[i].abs() > FEAS_TOL * scale {
                return Verdict::Infeasible(format!("row {i} reads 0 = {}", w.b[i]));
            }
            w.row_alive[i] = false;
            w.reductions.push(Reduction::ZeroRow { row: i });
            changed = true;
        }
    }
    Verdict::Changed(changed)
}

fn zero_columns(w: &mut Work) -> Verdict {
    let mut changed = false;
    for j in 0..w.c.len() {
        if w.col_alive[j] && w.active_col(j).next().is_none() {
            if w.c[j] < 0.0 {
                return Verdict::Unbounded(format!("column {j} is unconstrained with cost {}", w.c[j]));
            }
            w.col_alive[j] = false;
            w.reductions.push(Reduction::ZeroColumn { col: j });
            changed = true;
        }
    }
    Verdict::Changed(changed)
}

fn row_singletons(w: &mut Work) -> Verdict {
    let mut changed = false;
    let scale = w.b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..w.b.len() {
        if !w.row_alive[i] {
            continue;
        }
        let Some((j, a)) = only(w.active_row(i)) else {
            continue;
        };
        let mut value = w.b[i] / a;
        if value < 0.0 {
            if value * a.abs() < -FEAS_TOL * scale {
                return Verdict::Infeasible(format!("row {i} forces x{j} = {value} < 0"));
            }
            value = 0.0;
        }
        w.fix_column(j, value);
        w.row_alive[i] = false;
        w.reductions.push(Reduction::RowSingleton {
            row: i,
            col: j,
            value,
        });
        changed = true;
    }
    Verdict::Changed(changed)
}

fn duplicate_rows(w: &mut Work, threshold: f64) -> Verdict {
    let tol = if w.current_scaling_ratio() > threshold {
        DUP_TOL_BADLY_SCALED
    } else {
        DUP_TOL
    };
    let mut buckets: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for i in 0..w.b.len() {
        if !w.row_alive[i] {
            continue;
        }
        let pattern: Vec<usize> = w.active_row(i).map(|(j, _)| j).collect();
        if pattern.len() >= 2 {
            buckets.entry(pattern).or_default().push(i);
        }
    }
    let mut groups: Vec<Vec<usize>> = buckets.into_values().collect();
    groups.sort();
    let mut changed = false;
    for group in groups {
        let mut reps: Vec<usize> = Vec::new();
        'rows: for &k in &group {
            let vk: Vec<f64> = w.active_row(k).map(|(_, v)| v).collect();
            for &i in &reps {
                let vi: Vec<f64> = w.active_row(i).map(|(_, v)| v).collect();
                let t = vk[0] / vi[0];
                let parallel = vi
                    .iter()
                    .zip(&vk)
                    .all(|(a, b)| (b - t * a).abs() <= tol * b.abs().max(1e-300));
                if !parallel {
                    continue;
                }
                let rhs = t * w.b[i];
                if (w.b[k] - rhs).abs() > tol.max(FEAS_TOL) * w.b[k].abs().max(rhs.abs()).max(1.0) {
                    return Verdict::Infeasible(format!(
                        "rows {i} and {k} are parallel with inconsistent right-hand sides"
                    ));
                }
                w.row_alive[k] = false;
                w.reductions.push(Reduction::DuplicateRow { row: k, of: i });
                changed = true;
                continue 'rows;
            }
            reps.push(k);
        }
    }
    Verdict::Changed(changed)
}

fn free_column_singletons(w: &mut Work) -> Verdict {
    let mut changed = false;
    for j in 0..w.c.len() {
        if !w.col_alive[j] {
            continue;
        }
        let Some((i, pivot)) = only(w.active_col(j)) else {
            continue;
        };
        let others: Vec<(usize, f64)> = w.active_row(i).filter(|&(l, _)| l != j).collect();
        if others.is_empty() || w.b[i] / pivot < 0.0 {
            continue;
        }
        if others.iter().any(|&(_, a)| a * pivot > 0.0) {
            continue;
        }
        let cost = w.c[j];
        let lambda = cost / pivot;
        for &(l, a) in &others {
            w.c[l] -= lambda * a;
        }
        w.offset += lambda * w.b[i];
        w.reductions.push(Reduction::FreeColumnSingleton {
            row: i,
            col: j,
            pivot,
            rhs: w.b[i],
            cost,
            others,
        });
        w.col_alive[j] = false;
        w.row_alive[i] = false;
        changed = true;
    }
    Verdict::Changed(changed)
}

pub fn presolve(lp: &StandardLp, opts: &PresolveOptions) -> Result<PresolveResult, Error> {
    let (m, n) = (lp.nrows(), lp.ncols());
    let mut w = Work {
        lp,
        rows: lp.a.transpose(),
        row_alive: vec![true; m],
        col_alive: vec![true; n],
        b: lp.b.clone(),
        c: lp.c.clone(),
        offset: lp.offset,
        reductions: Vec::new(),
    };
    let rules = opts.rules;
    loop {
        let mut any = false;
        let passes: [(bool, &dyn Fn(&mut Work) -> Verdict); 5] = [
            (rules.zero_rows, &zero_rows),
            (rules.zero_columns, &zero_columns),
            (rules.row_singletons, &row_singletons),
            (rules.duplicate_rows, &|w: &mut Work| {
                duplicate_rows(w, opts.scaling_ratio_threshold)
            }),
            (rules.free_column_singletons, &free_column_singletons),
        ];
        for (enabled, pass) in passes {
            if !enabled {
                continue;
            }
            match pass(&mut w) {
                Verdict::Changed(c) => any |= c,
                Verdict::Infeasible(msg) => return Ok(PresolveResult::Infeasible(msg)),
                Verdict::Unbounded(msg) => return Ok(PresolveResult::Unbounded(msg)),
            }
        }
        if !any {
            break;
        }
    }

    let kept_rows: Vec<usize> = (0..m).filter(|&i| w.row_alive[i]).collect();
    let kept_cols: Vec<usize> = (0..n).filter(|&j| w.col_alive[j]).collect();
    let a = lp.a.select(&kept_rows, &kept_cols);
    let mut reduced = StandardLp::new(
        a,
        kept_rows.iter().map(|&i| w.b[i]).collect(),
        kept_cols.iter().map(|&j| w.c[j]).collect(),
    )?;
    reduced.offset = w.offset;
    reduced.row_names = lp
        .row_names
        .as_ref()
        .map(|names| kept_rows.iter().map(|&i| names[i].clone()).collect());
    reduced.col_names = lp
        .col_names
        .as_ref()
        .map(|names| kept_cols.iter().map(|&j| names[j].clone()).collect());
    log::debug!(
        "presolve: {}x{} -> {}x{} with {} reductions",
        m,
        n,
        kept_rows.len(),
        kept_cols.len(),
        w.reductions.len()
    );
    Ok(PresolveResult::Reduced {
        lp: reduced,
        trace: PresolveTrace {
            reductions: w.reductions,
            kept_rows,
            kept_cols,
            original_a: lp.a.clone(),
            original_c: lp.c.clone(),
        },
    })
}

/// Maps a reduced primal-dual solution `(x, λ, s)` back to the original
/// problem. Removed columns get `s = c − Aᵀλ`.
pub fn postsolve(
    trace: &PresolveTrace,
    x_red: &[f64],
    lambda_red: &[f64],
    s_red: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), Error> {
    if x_red.len() != trace.kept_cols.len()
        || s_red.len() != trace.kept_cols.len()
        || lambda_red.len() != trace.kept_rows.len()
    {
        return Err(Error::Dimension(format!(
            "reduced solution does not match a {}x{} reduced problem",
            trace.kept_rows.len(),
            trace.kept_cols.len()
        )));
    }
    let (m, n) = trace.original_dims();
    let a = &trace.original_a;
    let mut x = vec![0.0; n];
    let mut lambda = vec![0.0; m];
    for (k, &j) in trace.kept_cols.iter().enumerate() {
        x[j] = x_red[k];
    }
    for (k, &i) in trace.kept_rows.iter().enumerate() {
        lambda[i] = lambda_red[k];
    }
    // Multipliers that do not depend on the order of reversal.
    for r in &trace.reductions {
        if let Reduction::FreeColumnSingleton { row, pivot, cost, .. } = r {
            lambda[*row] = cost / pivot;
        }
    }
    for r in trace.reductions.iter().rev() {
        match r {
            Reduction::ZeroRow { row } | Reduction::DuplicateRow { row, .. } => lambda[*row] = 0.0,
            Reduction::ZeroColumn { col } => x[*col] = 0.0,
            Reduction::RowSingleton { row, col, value } => {
                x[*col] = *value;
                let (ri, v) = a.col(*col);
                let mut pivot = 0.0;
                let mut rest = 0.0;
                for (&i, &aij) in ri.iter().zip(v) {
                    if i == *row {
                        pivot = aij;
                    } else {
                        rest += aij * lambda[i];
                    }
                }
                lambda[*row] = (trace.original_c[*col] - rest) / pivot;
            }
            Reduction::FreeColumnSingleton {
                col,
                pivot,
                rhs,
                others,
                ..
            } => {
                let sum: f64 = others.iter().map(|&(l, a)| a * x[l]).sum();
                x[*col] = (rhs - sum) / pivot;
            }
        }
    }
    let aty = a.tr_mul_vec(&lambda);
    let mut s: Vec<f64> = (0..n).map(|j| trace.original_c[j] - aty[j]).collect();
    for (k, &j) in trace.kept_cols.iter().enumerate() {
        s[j] = s_red[k];
    }
    Ok((x, lambda, s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reduced(r: PresolveResult) -> (StandardLp, PresolveTrace) {
        match r {
            PresolveResult::Reduced { lp, trace } => (lp, trace),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn zero_row_with_zero_rhs_is_dropped() {
        let lp = StandardLp::from_dense(
            &[vec![1.0, 1.0, 1.0], vec![0.0, 0.0, 0.0]],
            &[2.0, 0.0],
            &[1.0, 2.0, 3.0],
        )
        .unwrap();
        let (red, trace) = reduced(presolve(&lp, &PresolveOptions::default()).unwrap());
        assert!(trace.reductions.contains(&Reduction::ZeroRow { row: 1 }));
        assert_eq!(red.nrows(), 1);
    }

    #[test]
    fn zero_row_with_nonzero_rhs_is_infeasible() {
        let lp = StandardLp::from_dense(&[vec![1.0, 1.0], vec![0.0, 0.0]], &[2.0, 1.0], &[1.0, 2.0]).unwrap();
        assert!(matches!(
            presolve(&lp, &PresolveOptions::default()).unwrap(),
            PresolveResult::Infeasible(_)
        ));
    }

    #[test]
    fn empty_column_with_negative_cost_is_unbounded() {
        let lp = StandardLp::from_dense(&[vec![1.0, 1.0, 0.0]], &[1.0], &[1.0, 1.0, -1.0]).unwrap();
        assert!(matches!(
            presolve(&lp, &PresolveOptions::default()).unwrap(),
            PresolveResult::Unbounded(_)
        ));
    }

    #[test]
    fn singleton_row_fixes_variable() {
        // x0 = 2 from row 1, then x0 + x1 + x2 = 5 remains.
        let lp = StandardLp::from_dense(
            &[vec![1.0, 1.0, 1.0], vec![2.0, 0.0, 0.0]],
            &[5.0, 4.0],
            &[1.0, 1.0, 2.0],
        )
        .unwrap();
        let opts = PresolveOptions {
            rules: RuleSet {
                free_column_singletons: false,
                ..RuleSet::default()
            },
            ..Default::default()
        };
        let (red, trace) = reduced(presolve(&lp, &opts).unwrap());
        assert_eq!(red.b, vec![3.0]);
        assert_eq!(red.offset, 2.0);
        let (x, lambda, s) = postsolve(&trace, &[3.0, 0.0], &[1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(x, vec![2.0, 3.0, 0.0]);
        // s0 = c0 − λ0 − 2λ1 = 0
        assert!((1.0 - lambda[0] - 2.0 * lambda[1]).abs() < 1e-15);
        assert!(s[0].abs() < 1e-15);
    }

    #[test]
    fn parallel_rows_are_merged_or_rejected() {
        let a = [vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0], vec![0.0, 1.0, 1.0]];
        let lp = StandardLp::from_dense(&a, &[1.0, 2.0, 3.0], &[1.0, 1.0, 1.0]).unwrap();
        let opts = PresolveOptions {
            rules: RuleSet {
                duplicate_rows: true,
                ..RuleSet::none()
            },
            ..Default::default()
        };
        let (red, _) = reduced(presolve(&lp, &opts).unwrap());
        assert_eq!(red.nrows(), 2);
        let bad = StandardLp::from_dense(&a, &[1.0, 3.0, 3.0], &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            presolve(&bad, &opts).unwrap(),
            PresolveResult::Infeasible(_)
        ));
    }

    #[test]
    fn implied_free_singleton_is_substituted() {
        // x2 only appears in x2 − x0 − x1 = 1, so x2 = 1 + x0 + x1 ≥ 0 for
        // every feasible x0, x1.
        let lp = StandardLp::from_dense(
            &[vec![-1.0, -1.0, 1.0], vec![1.0, 2.0, 0.0]],
            &[1.0, 4.0],
            &[1.0, 1.0, 3.0],
        )
        .unwrap();
        let opts = PresolveOptions {
            rules: RuleSet {
                free_column_singletons: true,
                ..RuleSet::none()
            },
            ..Default::default()
        };
        let (red, trace) = reduced(presolve(&lp, &opts).unwrap());
        assert_eq!(red.nrows(), 1);
        assert_eq!(red.c, vec![4.0, 4.0]);
        assert_eq!(red.offset, 3.0);
        let (x, _, _) = postsolve(&trace, &[4.0, 0.0], &[0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(x, vec![4.0, 0.0, 5.0]);
        assert_eq!(
            lp.primal_objective(&x),
            red.primal_objective(&[4.0, 0.0]) + red.offset
        );
    }

    #[test]
    fn scaling_ratio_of_matrix() {
        let a = CscMatrix::from_dense(&[vec![1e-3, 0.0], vec![0.0, 10.0]]).unwrap();
        assert!((scaling_ratio(&a) - 1e4).abs() < 1e-9);
        assert_eq!(scaling_ratio(&CscMatrix::zeros(2, 2)), 1.0);
    }
}
