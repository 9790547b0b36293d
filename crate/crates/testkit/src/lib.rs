//! Dense reference oracles and random instance generators shared by the test
//! suites. Nothing here depends on the solver crates.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_2;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A dense LP in standard form together with a strictly feasible
/// primal-dual point used to build it.
#[derive(Clone, Debug)]
pub struct DenseLp {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub x_feasible: Vec<f64>,
    pub lambda_feasible: Vec<f64>,
    pub s_feasible: Vec<f64>,
}

impl DenseLp {
    pub fn nrows(&self) -> usize {
        self.a.len()
    }

    pub fn ncols(&self) -> usize {
        self.c.len()
    }
}

/// Random `m × n` matrix with full row rank. With `density < 1` each entry is
/// kept with that probability; a leading diagonal keeps the rank.
pub fn random_matrix(rng: &mut impl Rng, m: usize, n: usize, density: f64) -> Vec<Vec<f64>> {
    assert!(n >= m);
    let mut a = vec![vec![0.0f64; n]; m];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if j == i || rng.gen::<f64>() < density {
                *v = rng.gen_range(-1.0..1.0);
            }
        }
        let d = row[i];
        row[i] = d.signum() * (1.0 + d.abs()) * (m as f64).sqrt();
    }
    a
}

/// Feasible and bounded LP: `b = A x̄` and `c = Aᵀλ̄ + s̄` for a random
/// interior `(x̄, λ̄, s̄)`.
pub fn random_feasible_lp(rng: &mut impl Rng, m: usize, n: usize, density: f64) -> DenseLp {
    let a = random_matrix(rng, m, n, density);
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let lambda: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let s: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let b = matvec(&a, &x);
    let aty = tr_matvec(&a, &lambda);
    let c = (0..n).map(|j| aty[j] + s[j]).collect();
    DenseLp {
        a,
        b,
        c,
        x_feasible: x,
        lambda_feasible: lambda,
        s_feasible: s,
    }
}

/// Instance with `m ∈ [3, 10]`, `n ∈ [2m, 4m]`; every other seed is 20% sparse.
pub fn random_instance(seed: u64) -> DenseLp {
    let mut r = rng(seed);
    let m = r.gen_range(3..=10);
    let n = r.gen_range(2 * m..=4 * m);
    let density = if seed % 2 == 0 { 1.0 } else { 0.2 };
    random_feasible_lp(&mut r, m, n, density)
}

/// `(A, b, c)` of a random feasible LP with one instance of every reducible structure
/// appended: a duplicate row, a zero row, an empty column, a row singleton
/// and an implied-free column singleton.
pub fn reducible_instance(seed: u64) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
    let mut r = rng(seed);
    let m = r.gen_range(3..=8);
    let n = r.gen_range(2 * m..=3 * m);
    let base = random_feasible_lp(&mut r, m, n, if seed % 2 == 0 { 1.0 } else { 0.3 });
    let mut a = base.a.clone();
    let mut b = base.b.clone();
    let mut c = base.c.clone();
    let mut x = base.x_feasible.clone();

    let widen = |a: &mut Vec<Vec<f64>>| a.iter_mut().for_each(|row| row.push(0.0));

    // column fixed by a singleton row, also present in two other rows
    widen(&mut a);
    let fixed = r.gen_range(0.5..2.0);
    for i in [0, m - 1] {
        a[i][n] = r.gen_range(0.5..1.5);
        b[i] += a[i][n] * fixed;
    }
    c.push(r.gen_range(-1.0..1.0));
    x.push(fixed);
    let mut row = vec![0.0; n + 1];
    row[n] = 2.0;
    a.push(row);
    b.push(2.0 * fixed);

    // empty column with positive cost
    widen(&mut a);
    c.push(r.gen_range(0.1..1.0));
    x.push(0.0);

    // implied-free column singleton in a new row
    widen(&mut a);
    let j = x.len();
    let mut row = vec![0.0; j + 1];
    let pivot = r.gen_range(1.0..2.0);
    row[j] = pivot;
    let xj = r.gen_range(5.0..8.0);
    let mut rhs = pivot * xj;
    for l in [0, 1] {
        row[l] = -r.gen_range(0.1..0.5);
        rhs += row[l] * x[l];
    }
    a.push(row);
    b.push(rhs);
    c.push(r.gen_range(-0.5..0.5));
    x.push(xj);

    // duplicate of row 1 and a zero row
    let dup: Vec<f64> = a[1].iter().map(|v| 3.0 * v).collect();
    a.push(dup);
    b.push(3.0 * b[1]);
    a.push(vec![0.0; x.len()]);
    b.push(0.0);

    (a, b, c)
}

/// Positive `(x, s)` and arbitrary `λ`, usually infeasible.
pub fn random_point(rng: &mut impl Rng, m: usize, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let x = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
    let lambda = (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let s = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
    (x, lambda, s)
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn tr_matvec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = a.first().map_or(0, |r| r.len());
    let mut out = vec![0.0; n];
    for (row, yi) in a.iter().zip(y) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v * yi;
        }
    }
    out
}

pub fn to_dmatrix(a: &[Vec<f64>]) -> DMatrix<f64> {
    let m = a.len();
    let n = a.first().map_or(0, |r| r.len());
    DMatrix::from_fn(m, n, |i, j| a[i][j])
}

/// `A diag(d) Aᵀ`, formed densely.
pub fn normal_matrix(a: &[Vec<f64>], d: &[f64]) -> Vec<Vec<f64>> {
    let m = a.len();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        for k in 0..m {
            out[i][k] = a[i].iter().zip(&a[k]).zip(d).map(|((p, q), w)| p * q * w).sum();
        }
    }
    out
}

/// Dense LU solve. `None` when the matrix is singular.
pub fn dense_solve(mat: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let lu = to_dmatrix(mat).lu();
    lu.solve(&DVector::from_column_slice(rhs))
        .map(|v| v.as_slice().to_vec())
}

/// Dense Cholesky solve for symmetric positive definite systems.
pub fn cholesky_solve(mat: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let chol = to_dmatrix(mat).cholesky()?;
    Some(chol.solve(&DVector::from_column_slice(rhs)).as_slice().to_vec())
}

/// Solution of the full block system
///
/// ```text
/// A dx          = r_p
///   Aᵀ dl + ds  = r_d
/// S dx  + X ds  = r_x
/// ```
///
/// assembled as a `(2n + m)`-square dense matrix and solved by LU.
pub fn block_solve(
    a: &[Vec<f64>],
    x: &[f64],
    s: &[f64],
    r_p: &[f64],
    r_d: &[f64],
    r_x: &[f64],
) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let m = a.len();
    let n = x.len();
    let size = 2 * n + m;
    let mut k = DMatrix::zeros(size, size);
    for i in 0..m {
        for j in 0..n {
            k[(i, j)] = a[i][j];
            k[(m + j, n + i)] = a[i][j];
        }
    }
    for j in 0..n {
        k[(m + j, n + m + j)] = 1.0;
        k[(m + n + j, j)] = s[j];
        k[(m + n + j, n + m + j)] = x[j];
    }
    let mut rhs = DVector::zeros(size);
    for i in 0..m {
        rhs[i] = r_p[i];
    }
    for j in 0..n {
        rhs[m + j] = r_d[j];
        rhs[m + n + j] = r_x[j];
    }
    let sol = k.lu().solve(&rhs)?;
    let v = sol.as_slice();
    Some((v[..n].to_vec(), v[n..n + m].to_vec(), v[n + m..].to_vec()))
}

/// First derivatives of the infeasible central path at `(x, s)`:
/// `Aẋ = r_b`, `Aᵀλ̇ + ṡ = r_c`, `Sẋ + Xṡ = x∘s`.
pub fn first_derivative_oracle(
    a: &[Vec<f64>],
    x: &[f64],
    s: &[f64],
    r_b: &[f64],
    r_c: &[f64],
) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let xs: Vec<f64> = x.iter().zip(s).map(|(p, q)| p * q).collect();
    block_solve(a, x, s, r_b, r_c, &xs)
}

/// Second derivatives at centering `σ`:
/// `Aẍ = 0`, `Aᵀλ̈ + s̈ = 0`, `Sẍ + Xs̈ = σμe − 2ẋ∘ṡ`.
pub fn second_derivative_oracle(
    a: &[Vec<f64>],
    x: &[f64],
    s: &[f64],
    xdot: &[f64],
    sdot: &[f64],
    sigma: f64,
) -> Option<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let mu = x.iter().zip(s).map(|(p, q)| p * q).sum::<f64>() / n as f64;
    let rhs: Vec<f64> = (0..n).map(|i| sigma * mu - 2.0 * xdot[i] * sdot[i]).collect();
    block_solve(a, x, s, &vec![0.0; a.len()], &vec![0.0; n], &rhs)
}

/// `v − v̇ sin α + v̈ (1 − cos α) − floor`
pub fn arc_slack(v: f64, floor: f64, vdot: f64, vddot: f64, alpha: f64) -> f64 {
    v - vdot * alpha.sin() + vddot * (1.0 - alpha.cos()) - floor
}

/// Largest `α ∈ [0, π/2]` keeping `arc_slack ≥ 0` on `[0, α]`, by bisection.
///
/// The slack has at most one interior critical point on the quarter turn, so
/// the interval splits into at most two monotone pieces; the first piece that
/// ends negative is bisected `iters` times.
pub fn step_oracle(v: f64, floor: f64, vdot: f64, vddot: f64, iters: usize) -> f64 {
    let g = |a: f64| arc_slack(v, floor, vdot, vddot, a);
    if g(0.0) < 0.0 {
        return 0.0;
    }
    let mut breaks = vec![0.0];
    // g'(a) = −v̇ cos a + v̈ sin a vanishes at tan a = v̇ / v̈
    if vddot != 0.0 {
        let c = (vdot / vddot).atan();
        if c > 0.0 && c < FRAC_PI_2 {
            breaks.push(c);
        }
    }
    breaks.push(FRAC_PI_2);
    for w in breaks.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        if g(hi) >= 0.0 {
            continue;
        }
        for _ in 0..iters {
            let mid = 0.5 * (lo + hi);
            if g(mid) >= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return lo;
    }
    FRAC_PI_2
}

/// Largest common `α` from [`step_oracle`] applied entrywise for the vector
/// positivity predicate `v − v̇ sin α + v̈ (1 − cos α) ≥ floor` over all entries.
pub fn vector_step_oracle(v: &[f64], floor: f64, vdot: &[f64], vddot: &[f64]) -> f64 {
    (0..v.len())
        .map(|i| step_oracle(v[i], floor, vdot[i], vddot[i], 60))
        .fold(FRAC_PI_2, f64::min)
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

/// `‖a − b‖∞ / max(1, ‖b‖∞)`
pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().map(|v| v.abs()).fold(1.0, f64::max);
    max_abs_diff(a, b) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_solve_recovers_known_solution() {
        let mut r = rng(3);
        let lp = random_feasible_lp(&mut r, 4, 9, 1.0);
        let (x, _, s) = random_point(&mut r, 4, 9);
        let dx: Vec<f64> = (0..9).map(|_| r.gen_range(-1.0..1.0)).collect();
        let dl: Vec<f64> = (0..4).map(|_| r.gen_range(-1.0..1.0)).collect();
        let ds: Vec<f64> = (0..9).map(|_| r.gen_range(-1.0..1.0)).collect();
        let rp = matvec(&lp.a, &dx);
        let atdl = tr_matvec(&lp.a, &dl);
        let rd: Vec<f64> = (0..9).map(|j| atdl[j] + ds[j]).collect();
        let rx: Vec<f64> = (0..9).map(|j| s[j] * dx[j] + x[j] * ds[j]).collect();
        let (ex, el, es) = block_solve(&lp.a, &x, &s, &rp, &rd, &rx).unwrap();
        assert!(max_abs_diff(&ex, &dx) < 1e-10);
        assert!(max_abs_diff(&el, &dl) < 1e-10);
        assert!(max_abs_diff(&es, &ds) < 1e-10);
    }

    #[test]
    fn cholesky_and_lu_agree() {
        let mut r = rng(5);
        let a = random_matrix(&mut r, 5, 12, 0.2);
        let d: Vec<f64> = (0..12).map(|_| r.gen_range(0.1..3.0)).collect();
        let m = normal_matrix(&a, &d);
        let rhs = vec![1.0, -2.0, 0.5, 3.0, 0.0];
        let p = dense_solve(&m, &rhs).unwrap();
        let q = cholesky_solve(&m, &rhs).unwrap();
        assert!(max_abs_diff(&p, &q) < 1e-10);
    }

    #[test]
    fn step_oracle_simple_cases() {
        assert_eq!(step_oracle(1.0, 0.0, 0.0, 0.0, 60), FRAC_PI_2);
        assert_eq!(step_oracle(-1.0, 0.0, 0.0, 0.0, 60), 0.0);
        // 1 − 2 sin α = 0 at α = π/6
        let a = step_oracle(1.0, 0.0, 2.0, 0.0, 60);
        assert!((a - std::f64::consts::FRAC_PI_6).abs() < 1e-12);
    }

    #[test]
    fn instance_dimensions_in_range() {
        for seed in 0..40 {
            let lp = random_instance(seed);
            let (m, n) = (lp.nrows(), lp.ncols());
            assert!((3..=10).contains(&m));
            assert!(n >= 2 * m && n <= 4 * m);
        }
    }
}
