//! Normal-equations solver for `A D² Aᵀ u = v`.
//!
//! The symbolic phase orders the rows of `A` by minimum degree and builds the
//! elimination tree of the permuted matrix. It also records, for every column
//! of `A`, where its outer-product contributions land.
//! The numeric phase assembles the matrix for a fresh diagonal and runs an
//! up-looking `LDLᵀ` factorization. Tiny pivots are replaced by a huge value,
//! which pins the corresponding solution component to (nearly) zero.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use crate::sparse::CscMatrix;
use crate::Error;

/// Value substituted for a pivot that falls below the regularization floor.
pub const HUGE_PIVOT: f64 = 1e64;

/// Upper bound on iterative-refinement passes per solve.
const MAX_REFINEMENT_STEPS: usize = 5;

const NONE: usize = usize::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ordering {
    Natural,
    MinimumDegree,
}

#[derive(Clone, Debug, PartialEq)]
pub struct KktOptions {
    /// Relative pivot floor: a pivot below `floor` times its own diagonal
    /// entry of `A D² Aᵀ` has cancelled to roundoff and is regularized.
    pub pivot_floor: f64,
    /// Factor densely when `A` has at most this many rows.
    pub dense_threshold: usize,
    /// One step of iterative refinement per solve.
    pub refine: bool,
    /// Zero out diagonal weights below `1e-14 · max weight`.
    pub drop_tiny_weights: bool,
    /// Switch to the dense path after this many consecutive regularized
    /// factorizations (only when `m` is at most `dense_fallback_limit`).
    pub dense_after_regularizations: usize,
    pub dense_fallback_limit: usize,
}

impl Default for KktOptions {
    fn default() -> Self {
        KktOptions {
            pivot_floor: 1e-12,
            dense_threshold: 200,
            refine: true,
            drop_tiny_weights: false,
            dense_after_regularizations: 3,
            dense_fallback_limit: 3000,
        }
    }
}

/// Ordering, elimination tree and storage layout of `L` for one sparsity
/// pattern of `A`.
#[derive(Clone, Debug)]
pub struct SymbolicAnalysis {
    m: usize,
    perm: Vec<usize>,
    /// Upper triangle of `P A Aᵀ Pᵀ`, column by column.
    m_col_ptr: Vec<usize>,
    m_row_idx: Vec<usize>,
    /// For column `j` of `A`: `(target, entry a, entry b)` triples.
    contrib_ptr: Vec<usize>,
    contrib: Vec<(usize, usize, usize)>,
    parent: Vec<usize>,
    l_col_ptr: Vec<usize>,
    pattern_hash: u64,
}

impl SymbolicAnalysis {
    pub fn nrows(&self) -> usize {
        self.m
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    pub fn etree(&self) -> &[usize] {
        &self.parent
    }

    /// Number of strictly-lower entries of `L`.
    pub fn l_nnz(&self) -> usize {
        self.l_col_ptr[self.m]
    }

    /// Entries in the upper triangle of the assembled matrix.
    pub fn matrix_nnz(&self) -> usize {
        self.m_row_idx.len()
    }

    pub fn pattern_hash(&self) -> u64 {
        self.pattern_hash
    }
}

/// Hash of the sparsity pattern (dimensions, column pointers, row indices).
pub fn pattern_hash(a: &CscMatrix) -> u64 {
    let mut h = DefaultHasher::new();
    a.nrows().hash(&mut h);
    a.ncols().hash(&mut h);
    a.col_ptr().hash(&mut h);
    a.row_indices().hash(&mut h);
    h.finish()
}

/// Adjacency lists (without self loops) of the pattern of `A Aᵀ`.
fn aat_graph(a: &CscMatrix) -> Vec<BTreeSet<usize>> {
    let mut adj = vec![BTreeSet::new(); a.nrows()];
    for j in 0..a.ncols() {
        let (rows, _) = a.col(j);
        for (p, &i) in rows.iter().enumerate() {
            for &k in &rows[p + 1..] {
                adj[i].insert(k);
                adj[k].insert(i);
            }
        }
    }
    adj
}

/// Minimum-degree ordering on the explicit elimination graph of `A Aᵀ`.
/// Ties go to the smallest index, so the result is deterministic.
pub fn minimum_degree_order(a: &CscMatrix) -> Vec<usize> {
    let m = a.nrows();
    let mut adj = aat_graph(a);
    let mut queue: BTreeSet<(usize, usize)> = (0..m).map(|i| (adj[i].len(), i)).collect();
    let mut order = Vec::with_capacity(m);
    while let Some((_, v)) = queue.pop_first() {
        order.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
            for &w in &nbrs {
                if w != u {
                    adj[u].insert(w);
                }
            }
            queue.insert((adj[u].len(), u));
        }
    }
    order
}

pub fn symbolic_analyze(a: &CscMatrix) -> SymbolicAnalysis {
    symbolic_analyze_with(a, Ordering::MinimumDegree)
}

pub fn symbolic_analyze_with(a: &CscMatrix, ordering: Ordering) -> SymbolicAnalysis {
    let m = a.nrows();
    let perm = match ordering {
        Ordering::Natural => (0..m).collect(),
        Ordering::MinimumDegree => minimum_degree_order(a),
    };
    let mut pinv = vec![0; m];
    for (new, &old) in perm.iter().enumerate() {
        pinv[old] = new;
    }

    // Upper-triangle pattern of the permuted matrix, diagonal always present.
    let mut cols: Vec<BTreeSet<usize>> = (0..m).map(|k| BTreeSet::from([k])).collect();
    for j in 0..a.ncols() {
        let (rows, _) = a.col(j);
        for &r1 in rows {
            for &r2 in rows {
                let (p, q) = (pinv[r1], pinv[r2]);
                if p < q {
                    cols[q].insert(p);
                }
            }
        }
    }
    let mut m_col_ptr = vec![0; m + 1];
    let mut m_row_idx = Vec::new();
    for (k, set) in cols.iter().enumerate() {
        m_row_idx.extend(set.iter().copied());
        m_col_ptr[k + 1] = m_row_idx.len();
    }
    let locate = |row: usize, col: usize| -> usize {
        let slice = &m_row_idx[m_col_ptr[col]..m_col_ptr[col + 1]];
        m_col_ptr[col] + slice.binary_search(&row).expect("entry in pattern")
    };

    let mut contrib_ptr = vec![0; a.ncols() + 1];
    let mut contrib = Vec::new();
    for j in 0..a.ncols() {
        let base = a.col_ptr()[j];
        let (rows, _) = a.col(j);
        for (ea, &r1) in rows.iter().enumerate() {
            for (eb, &r2) in rows.iter().enumerate().skip(ea) {
                let (p, q) = (pinv[r1], pinv[r2]);
                let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
                contrib.push((locate(lo, hi), base + ea, base + eb));
            }
        }
        contrib_ptr[j + 1] = contrib.len();
    }

    // Elimination tree and column counts.
    let mut parent = vec![NONE; m];
    let mut flag = vec![NONE; m];
    let mut lnz = vec![0usize; m];
    for k in 0..m {
        flag[k] = k;
        for &row in &m_row_idx[m_col_ptr[k]..m_col_ptr[k + 1]] {
            let mut i = row;
            while flag[i] != k {
                if parent[i] == NONE {
                    parent[i] = k;
                }
                lnz[i] += 1;
                flag[i] = k;
                i = parent[i];
            }
        }
    }
    let mut l_col_ptr = vec![0; m + 1];
    for k in 0..m {
        l_col_ptr[k + 1] = l_col_ptr[k] + lnz[k];
    }

    SymbolicAnalysis {
        m,
        perm,
        m_col_ptr,
        m_row_idx,
        contrib_ptr,
        contrib,
        parent,
        l_col_ptr,
        pattern_hash: pattern_hash(a),
    }
}

#[derive(Clone, Debug)]
enum Storage {
    Sparse {
        l_row_idx: Vec<usize>,
        l_values: Vec<f64>,
    },
    /// Row-major unit lower triangle in original row order.
    Dense { l: Vec<f64> },
}

/// A numeric `LDLᵀ` factorization of `A D² Aᵀ`.
#[derive(Clone, Debug)]
pub struct NormalEqFactor {
    m: usize,
    storage: Storage,
    /// Pivots, in elimination order (permuted for the sparse path).
    d: Vec<f64>,
    weights: Vec<f64>,
    regularized: Vec<usize>,
}

impl NormalEqFactor {
    /// Rows (in original numbering) whose pivots were regularized.
    pub fn regularized_pivots(&self) -> &[usize] {
        &self.regularized
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense { .. })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

fn checked_weights(a: &CscMatrix, d2: &[f64], drop_tiny: bool) -> Result<Vec<f64>, Error> {
    if d2.len() != a.ncols() {
        return Err(Error::Dimension(format!(
            "{} weights for {} columns",
            d2.len(),
            a.ncols()
        )));
    }
    if let Some(j) = d2.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::Numerical(format!(
            "invalid weight {} in column {j}",
            d2[j]
        )));
    }
    let mut w = d2.to_vec();
    if drop_tiny {
        let cut = 1e-14 * w.iter().cloned().fold(0.0, f64::max);
        for v in &mut w {
            if *v < cut {
                *v = 0.0;
            }
        }
    }
    Ok(w)
}

/// Sparse numeric factorization with the given symbolic analysis.
pub fn factor(
    sym: &SymbolicAnalysis,
    a: &CscMatrix,
    d2: &[f64],
    opts: &KktOptions,
) -> Result<NormalEqFactor, Error> {
    if pattern_hash(a) != sym.pattern_hash {
        return Err(Error::Numerical(
            "sparsity pattern differs from the symbolic analysis".into(),
        ));
    }
    let weights = checked_weights(a, d2, opts.drop_tiny_weights)?;
    let m = sym.m;

    let mut mv = vec![0.0; sym.m_row_idx.len()];
    let av = a.values();
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        for &(t, ea, eb) in &sym.contrib[sym.contrib_ptr[j]..sym.contrib_ptr[j + 1]] {
            mv[t] += w * av[ea] * av[eb];
        }
    }

    let nnz_l = sym.l_nnz();
    let mut l_row_idx = vec![0; nnz_l];
    let mut l_values = vec![0.0; nnz_l];
    let mut d = vec![0.0; m];
    let mut y = vec![0.0; m];
    let mut pattern = vec![0; m];
    let mut flag = vec![NONE; m];
    let mut lnz = vec![0usize; m];
    let mut regularized = Vec::new();
    let lp = &sym.l_col_ptr;

    for k in 0..m {
        y[k] = 0.0;
        let mut top = m;
        flag[k] = k;
        for p in sym.m_col_ptr[k]..sym.m_col_ptr[k + 1] {
            let mut i = sym.m_row_idx[p];
            y[i] += mv[p];
            let mut len = 0;
            while flag[i] != k {
                pattern[len] = i;
                len += 1;
                flag[i] = k;
                i = sym.parent[i];
            }
            while len > 0 {
                top -= 1;
                len -= 1;
                pattern[top] = pattern[len];
            }
        }
        let mut dk = y[k];
        let floor = opts.pivot_floor * dk;
        y[k] = 0.0;
        for &i in &pattern[top..m] {
            let yi = y[i];
            y[i] = 0.0;
            let end = lp[i] + lnz[i];
            for p in lp[i]..end {
                y[l_row_idx[p]] -= l_values[p] * yi;
            }
            let lki = yi / d[i];
            dk -= lki * yi;
            l_row_idx[end] = k;
            l_values[end] = lki;
            lnz[i] += 1;
        }
        if !(dk > floor) || !dk.is_finite() {
            dk = HUGE_PIVOT;
            regularized.push(sym.perm[k]);
        }
        d[k] = dk;
    }

    Ok(NormalEqFactor {
        m,
        storage: Storage::Sparse { l_row_idx, l_values },
        d,
        weights,
        regularized,
    })
}

/// Dense `LDLᵀ` of `A D² Aᵀ` in the original row order.
pub fn factor_dense(a: &CscMatrix, d2: &[f64], opts: &KktOptions) -> Result<NormalEqFactor, Error> {
    let weights = checked_weights(a, d2, opts.drop_tiny_weights)?;
    let m = a.nrows();
    let mut l = vec![0.0; m * m];
    for (j, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let (rows, vals) = a.col(j);
        for (p, (&r1, &v1)) in rows.iter().zip(vals).enumerate() {
            for (&r2, &v2) in rows[p..].iter().zip(&vals[p..]) {
                // rows are sorted so r2 ≥ r1: fill the lower triangle.
                l[r2 * m + r1] += w * v1 * v2;
            }
        }
    }
    let mut d = vec![0.0; m];
    let mut regularized = Vec::new();
    for k in 0..m {
        let mut dk = l[k * m + k];
        let floor = opts.pivot_floor * dk;
        for p in 0..k {
            dk -= l[k * m + p] * l[k * m + p] * d[p];
        }
        if !(dk > floor) || !dk.is_finite() {
            dk = HUGE_PIVOT;
            regularized.push(k);
        }
        d[k] = dk;
        l[k * m + k] = 1.0;
        for i in k + 1..m {
            let mut v = l[i * m + k];
            for p in 0..k {
                v -= l[i * m + p] * l[k * m + p] * d[p];
            }
            l[i * m + k] = v / dk;
        }
    }
    Ok(NormalEqFactor {
        m,
        storage: Storage::Dense { l },
        d,
        weights,
        regularized,
    })
}

fn solve_once(sym: &SymbolicAnalysis, f: &NormalEqFactor, rhs: &[f64]) -> Vec<f64> {
    let m = f.m;
    match &f.storage {
        Storage::Sparse { l_row_idx, l_values } => {
            let lp = &sym.l_col_ptr;
            let mut x: Vec<f64> = sym.perm.iter().map(|&i| rhs[i]).collect();
            for j in 0..m {
                let xj = x[j];
                for p in lp[j]..lp[j + 1] {
                    x[l_row_idx[p]] -= l_values[p] * xj;
                }
            }
            for (xj, dj) in x.iter_mut().zip(&f.d) {
                *xj /= dj;
            }
            for j in (0..m).rev() {
                let mut xj = x[j];
                for p in lp[j]..lp[j + 1] {
                    xj -= l_values[p] * x[l_row_idx[p]];
                }
                x[j] = xj;
            }
            let mut out = vec![0.0; m];
            for (k, &i) in sym.perm.iter().enumerate() {
                out[i] = x[k];
            }
            out
        }
        Storage::Dense { l } => {
            let mut x = rhs.to_vec();
            for i in 0..m {
                let mut v = x[i];
                for p in 0..i {
                    v -= l[i * m + p] * x[p];
                }
                x[i] = v;
            }
            for (xi, di) in x.iter_mut().zip(&f.d) {
                *xi /= di;
            }
            for i in (0..m).rev() {
                let mut v = x[i];
                for p in i + 1..m {
                    v -= l[p * m + i] * x[p];
                }
                x[i] = v;
            }
            x
        }
    }
}

/// `y = A diag(w) Aᵀ x`
pub fn normal_matvec(a: &CscMatrix, w: &[f64], x: &[f64]) -> Vec<f64> {
    let mut t = a.tr_mul_vec(x);
    for (ti, wi) in t.iter_mut().zip(w) {
        *ti *= wi;
    }
    a.mul_vec(&t)
}

/// Solves `A D² Aᵀ u = rhs` with an existing factorization, optionally with
/// one step of iterative refinement.
pub fn solve(
    sym: &SymbolicAnalysis,
    a: &CscMatrix,
    f: &NormalEqFactor,
    rhs: &[f64],
    refine: bool,
) -> Result<Vec<f64>, Error> {
    if rhs.len() != f.m {
        return Err(Error::Dimension(format!(
            "right-hand side of length {} for an order-{} system",
            rhs.len(),
            f.m
        )));
    }
    let mut u = solve_once(sym, f, rhs);
    if refine {
        // repeat while each pass at least halves the residual
        let residual = |u: &[f64]| -> Vec<f64> {
            let mu = normal_matvec(a, &f.weights, u);
            rhs.iter().zip(&mu).map(|(b, v)| b - v).collect()
        };
        let mut r = residual(&u);
        let mut norm = inf_norm(&r);
        for _ in 0..MAX_REFINEMENT_STEPS {
            if norm == 0.0 {
                break;
            }
            let du = solve_once(sym, f, &r);
            let trial: Vec<f64> = u.iter().zip(&du).map(|(ui, di)| ui + di).collect();
            let r_trial = residual(&trial);
            let trial_norm = inf_norm(&r_trial);
            if !(trial_norm < norm) {
                break;
            }
            let enough = trial_norm > 0.5 * norm;
            u = trial;
            r = r_trial;
            norm = trial_norm;
            if enough {
                break;
            }
        }
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("normal-equations solve produced NaN".into()));
    }
    Ok(u)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Owns the symbolic analysis for one constraint matrix and counts numeric
/// factorizations.
#[derive(Clone, Debug)]
pub struct KktSolver {
    a: CscMatrix,
    sym: SymbolicAnalysis,
    opts: KktOptions,
    dense: bool,
    regularized_streak: usize,
    factorizations: usize,
}

impl KktSolver {
    pub fn new(a: &CscMatrix, opts: KktOptions) -> Self {
        let dense = a.nrows() <= opts.dense_threshold;
        let sym = symbolic_analyze(a);
        KktSolver {
            a: a.clone(),
            sym,
            opts,
            dense,
            regularized_streak: 0,
            factorizations: 0,
        }
    }

    pub fn matrix(&self) -> &CscMatrix {
        &self.a
    }

    pub fn symbolic(&self) -> &SymbolicAnalysis {
        &self.sym
    }

    pub fn uses_dense(&self) -> bool {
        self.dense
    }

    pub fn numeric_factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn factor(&mut self, d2: &[f64]) -> Result<NormalEqFactor, Error> {
        self.factorizations += 1;
        let f = if self.dense {
            factor_dense(&self.a, d2, &self.opts)?
        } else {
            factor(&self.sym, &self.a, d2, &self.opts)?
        };
        if f.regularized.is_empty() {
            self.regularized_streak = 0;
        } else {
            self.regularized_streak += 1;
            log::debug!("regularized {} pivots", f.regularized.len());
            if !self.dense
                && self.regularized_streak >= self.opts.dense_after_regularizations
                && self.a.nrows() <= self.opts.dense_fallback_limit
            {
                log::info!("switching to the dense normal-equations path");
                self.dense = true;
            }
        }
        Ok(f)
    }

    pub fn solve(&self, f: &NormalEqFactor, rhs: &[f64]) -> Result<Vec<f64>, Error> {
        solve(&self.sym, &self.a, f, rhs, self.opts.refine)
    }
}
