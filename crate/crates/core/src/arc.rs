//! Arc geometry: derivatives of the infeasible central path and the ellipse
//! they define through the current iterate. The duality measure along the
//! ellipse is affine in σ, and the step lengths that keep iterates positive
//! have closed forms.

use std::f64::consts::FRAC_PI_2;

use crate::kkt::{KktSolver, NormalEqFactor};
use crate::problem::{Iterate, StandardLp};
use crate::sparse::dot;
use crate::Error;

/// First derivatives and the σ-affine split of the second derivatives, so
/// that `ẍ(σ) = p_x σ + q_x` (and likewise for λ and s).
#[derive(Clone, Debug, PartialEq)]
pub struct ArcDerivatives {
    pub xdot: Vec<f64>,
    pub lambda_dot: Vec<f64>,
    pub sdot: Vec<f64>,
    pub p_x: Vec<f64>,
    pub p_lambda: Vec<f64>,
    pub p_s: Vec<f64>,
    pub q_x: Vec<f64>,
    pub q_lambda: Vec<f64>,
    pub q_s: Vec<f64>,
}

fn affine(p: &[f64], q: &[f64], sigma: f64) -> Vec<f64> {
    p.iter().zip(q).map(|(p, q)| p * sigma + q).collect()
}

impl ArcDerivatives {
    pub fn xddot(&self, sigma: f64) -> Vec<f64> {
        affine(&self.p_x, &self.q_x, sigma)
    }

    pub fn lambda_ddot(&self, sigma: f64) -> Vec<f64> {
        affine(&self.p_lambda, &self.q_lambda, sigma)
    }

    pub fn sddot(&self, sigma: f64) -> Vec<f64> {
        affine(&self.p_s, &self.q_s, sigma)
    }
}

/// Weights `x/s` of the normal-equations matrix at an iterate.
pub fn scaling_weights(it: &Iterate) -> Vec<f64> {
    it.x().iter().zip(it.s()).map(|(x, s)| x / s).collect()
}

/// `(ẋ, λ̇, ṡ)` from `(A X S⁻¹ Aᵀ) λ̇ = A X S⁻¹ r_c − b`, `ṡ = r_c − Aᵀλ̇`,
/// `ẋ = x − X S⁻¹ ṡ`. The factor must belong to the weights `x/s`.
pub fn first_derivatives(
    lp: &StandardLp,
    it: &Iterate,
    kkt: &KktSolver,
    f: &NormalEqFactor,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), Error> {
    let a = kkt.matrix();
    let d2 = scaling_weights(it);
    let t: Vec<f64> = d2.iter().zip(it.r_c()).map(|(d, r)| d * r).collect();
    let mut rhs = a.mul_vec(&t);
    for (r, b) in rhs.iter_mut().zip(&lp.b) {
        *r -= b;
    }
    let lambda_dot = kkt.solve(f, &rhs)?;
    let atl = a.tr_mul_vec(&lambda_dot);
    let sdot: Vec<f64> = it.r_c().iter().zip(&atl).map(|(r, v)| r - v).collect();
    let xdot: Vec<f64> = it
        .x()
        .iter()
        .zip(&d2)
        .zip(&sdot)
        .map(|((x, d), sd)| x - d * sd)
        .collect();
    Ok((xdot, lambda_dot, sdot))
}

/// Solves the two second-derivative systems sharing the factor:
/// `M p_λ = −A S⁻¹ μe` and `M q_λ = 2 A S⁻¹ (ẋ∘ṡ)`.
pub fn second_derivative_split(
    it: &Iterate,
    xdot: &[f64],
    sdot: &[f64],
    kkt: &KktSolver,
    f: &NormalEqFactor,
) -> Result<ArcDerivatives, Error> {
    let a = kkt.matrix();
    let (x, s, mu) = (it.x(), it.s(), it.mu());

    let mu_over_s: Vec<f64> = s.iter().map(|si| mu / si).collect();
    let rhs_p: Vec<f64> = a.mul_vec(&mu_over_s).into_iter().map(|v| -v).collect();
    let p_lambda = kkt.solve(f, &rhs_p)?;
    let p_s: Vec<f64> = a.tr_mul_vec(&p_lambda).into_iter().map(|v| -v).collect();
    let p_x: Vec<f64> = (0..x.len())
        .map(|i| mu_over_s[i] - x[i] * p_s[i] / s[i])
        .collect();

    let w: Vec<f64> = (0..x.len()).map(|i| 2.0 * xdot[i] * sdot[i] / s[i]).collect();
    let q_lambda = kkt.solve(f, &a.mul_vec(&w))?;
    let q_s: Vec<f64> = a.tr_mul_vec(&q_lambda).into_iter().map(|v| -v).collect();
    let q_x: Vec<f64> = (0..x.len()).map(|i| -x[i] * q_s[i] / s[i] - w[i]).collect();

    Ok(ArcDerivatives {
        xdot: xdot.to_vec(),
        lambda_dot: Vec::new(),
        sdot: sdot.to_vec(),
        p_x,
        p_lambda,
        p_s,
        q_x,
        q_lambda,
        q_s,
    })
}

/// All derivatives at `it` with one factorization of `A X S⁻¹ Aᵀ`.
pub fn arc_derivatives(
    lp: &StandardLp,
    it: &Iterate,
    kkt: &KktSolver,
    f: &NormalEqFactor,
) -> Result<ArcDerivatives, Error> {
    let (xdot, lambda_dot, sdot) = first_derivatives(lp, it, kkt, f)?;
    let mut d = second_derivative_split(it, &xdot, &sdot, kkt, f)?;
    d.lambda_dot = lambda_dot;
    Ok(d)
}

fn arc_vec(v: &[f64], dot: &[f64], p: &[f64], q: &[f64], sigma: f64, sin: f64, omc: f64) -> Vec<f64> {
    (0..v.len())
        .map(|i| v[i] - dot[i] * sin + (p[i] * sigma + q[i]) * omc)
        .collect()
}

/// The point at angle α on the ellipse: `x − ẋ sin α + ẍ(σ)(1 − cos α)`.
pub fn ellipse_point(
    it: &Iterate,
    d: &ArcDerivatives,
    sigma: f64,
    alpha: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let (sin, omc) = (alpha.sin(), 1.0 - alpha.cos());
    (
        arc_vec(it.x(), &d.xdot, &d.p_x, &d.q_x, sigma, sin, omc),
        arc_vec(
            it.lambda(),
            &d.lambda_dot,
            &d.p_lambda,
            &d.q_lambda,
            sigma,
            sin,
            omc,
        ),
        arc_vec(it.s(), &d.sdot, &d.p_s, &d.q_s, sigma, sin, omc),
    )
}

/// Inner products that make `μ(σ, α)` an affine function of σ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MuModel {
    n: f64,
    mu: f64,
    xdot_sdot: f64,
    p_cross: f64,
    q_cross: f64,
}

impl MuModel {
    pub fn new(it: &Iterate, d: &ArcDerivatives) -> Self {
        MuModel {
            n: it.n() as f64,
            mu: it.mu(),
            xdot_sdot: dot(&d.xdot, &d.sdot),
            p_cross: dot(&d.xdot, &d.p_s) + dot(&d.sdot, &d.p_x),
            q_cross: dot(&d.sdot, &d.q_x) + dot(&d.xdot, &d.q_s),
        }
    }

    /// `(a_u(α), b_u(α))` with `μ(σ, α) = (a_u σ + b_u) / n`.
    pub fn coefficients(&self, alpha: f64) -> (f64, f64) {
        let (sin, omc) = (alpha.sin(), 1.0 - alpha.cos());
        let a_u = self.n * self.mu * omc - self.p_cross * sin * omc;
        let b_u = self.n * self.mu * (1.0 - sin) - (self.xdot_sdot * omc * omc + self.q_cross * sin * omc);
        (a_u, b_u)
    }

    pub fn eval(&self, sigma: f64, alpha: f64) -> f64 {
        let (a_u, b_u) = self.coefficients(alpha);
        (a_u * sigma + b_u) / self.n
    }
}

pub fn mu_of_sigma_alpha(it: &Iterate, d: &ArcDerivatives, sigma: f64, alpha: f64) -> f64 {
    MuModel::new(it, d).eval(sigma, alpha)
}

/// Floors `φ`, `ψ` that the next `x` and `s` must stay above.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepThresholds {
    pub phi: f64,
    pub psi: f64,
}

pub fn thresholds(it: &Iterate, rho: f64) -> StepThresholds {
    let min_x = it.x().iter().cloned().fold(f64::INFINITY, f64::min);
    let min_s = it.s().iter().cloned().fold(f64::INFINITY, f64::min);
    StepThresholds {
        phi: f64::min(rho * min_x, it.nu()),
        psi: f64::min(rho * min_s, it.nu()),
    }
}

fn clamp_unit(v: f64) -> f64 {
    v.clamp(-1.0, 1.0)
}

/// Largest `α ∈ [0, π/2]` with `v − v̇ sin a + v̈ (1 − cos a) ≥ floor` for all
/// `a ∈ [0, α]`.
///
/// Returns 0 if the floor is already violated at `a = 0`.
pub fn alpha_case(v: f64, floor: f64, vdot: f64, vddot: f64) -> f64 {
    let w = v - floor;
    if w < 0.0 {
        return 0.0;
    }
    if vdot == 0.0 && vddot == 0.0 {
        return FRAC_PI_2;
    }
    if vdot == 0.0 {
        return if w + vddot >= 0.0 {
            FRAC_PI_2
        } else {
            clamp_unit((w + vddot) / vddot).acos()
        };
    }
    if vddot == 0.0 {
        return if vdot <= w { FRAC_PI_2 } else { (w / vdot).asin() };
    }
    let r = vdot.hypot(vddot);
    let alpha = if vdot > 0.0 && vddot > 0.0 {
        if w + vddot >= r {
            FRAC_PI_2
        } else {
            clamp_unit((w + vddot) / r).asin() - clamp_unit(vddot / r).asin()
        }
    } else if vdot > 0.0 {
        if w + vddot >= r {
            FRAC_PI_2
        } else {
            clamp_unit((w + vddot) / r).asin() + clamp_unit(-vddot / r).asin()
        }
    } else if vddot < 0.0 {
        if w + vddot >= 0.0 {
            FRAC_PI_2
        } else {
            std::f64::consts::PI - clamp_unit(-(w + vddot) / r).asin() - clamp_unit(-vddot / r).asin()
        }
    } else {
        FRAC_PI_2
    };
    alpha.clamp(0.0, FRAC_PI_2)
}

/// Step length for one primal coordinate against the floor `φ`.
pub fn alpha_x_case(x_i: f64, phi: f64, xdot_i: f64, xddot_i: f64) -> f64 {
    alpha_case(x_i, phi, xdot_i, xddot_i)
}

/// Step length for one dual slack coordinate against the floor `ψ`.
pub fn alpha_s_case(s_i: f64, psi: f64, sdot_i: f64, sddot_i: f64) -> f64 {
    alpha_case(s_i, psi, sdot_i, sddot_i)
}

/// Per-σ minima of the coordinate step lengths, split by the sign of the
/// σ-coefficient of the second derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitMinima {
    /// Over coordinates whose `p` entry is negative (step shrinks as σ grows).
    pub negative: f64,
    /// Over coordinates whose `p` entry is positive (step grows with σ).
    pub positive: f64,
    /// Over all coordinates.
    pub all: f64,
    pub alpha_x: f64,
    pub alpha_s: f64,
}

fn split_minima(it: &Iterate, d: &ArcDerivatives, th: StepThresholds, sigma: f64) -> SplitMinima {
    let mut out = SplitMinima {
        negative: f64::INFINITY,
        positive: f64::INFINITY,
        all: FRAC_PI_2,
        alpha_x: FRAC_PI_2,
        alpha_s: FRAC_PI_2,
    };
    let blocks = [
        (it.x(), &d.xdot, &d.p_x, &d.q_x, th.phi),
        (it.s(), &d.sdot, &d.p_s, &d.q_s, th.psi),
    ];
    for (block, (v, vdot, p, q, floor)) in blocks.into_iter().enumerate() {
        let mut block_min = FRAC_PI_2;
        for i in 0..v.len() {
            let a = alpha_case(v[i], floor, vdot[i], p[i] * sigma + q[i]);
            block_min = block_min.min(a);
            if p[i] < 0.0 {
                out.negative = out.negative.min(a);
            } else if p[i] > 0.0 {
                out.positive = out.positive.min(a);
            }
        }
        if block == 0 {
            out.alpha_x = block_min;
        } else {
            out.alpha_s = block_min;
        }
        out.all = out.all.min(block_min);
    }
    out
}

/// `min_i {α_{x_i}(σ), α_{s_i}(σ)}`
pub fn max_alpha_for_sigma(it: &Iterate, d: &ArcDerivatives, th: StepThresholds, sigma: f64) -> f64 {
    split_minima(it, d, th, sigma).all
}

/// Per-block minima at σ, for callers that need `α_x` and `α_s` separately.
pub fn step_lengths(it: &Iterate, d: &ArcDerivatives, th: StepThresholds, sigma: f64) -> SplitMinima {
    split_minima(it, d, th, sigma)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSelection {
    pub sigma: f64,
    pub alpha: f64,
    /// Bracket width before each bisection step, then the final width.
    pub widths: Vec<f64>,
}

/// Bisection on σ for `max_σ min_i α_i(σ)` over `[σ_min, σ_max]`.
///
/// At a trial σ the coordinates whose step shrinks with σ are compared with
/// those whose step grows with σ: if the growing class binds, σ moves up,
/// otherwise down. An empty class imposes no constraint.
pub fn select_sigma_alpha(
    it: &Iterate,
    d: &ArcDerivatives,
    th: StepThresholds,
    sigma_min: f64,
    sigma_max: f64,
    tol: f64,
) -> SigmaSelection {
    let mut lb = sigma_min;
    let mut width = sigma_max - sigma_min;
    let mut widths = vec![width];
    while width > tol {
        let sigma = lb + 0.5 * width;
        let m = split_minima(it, d, th, sigma);
        if m.negative > m.positive {
            lb = sigma;
        }
        width *= 0.5;
        widths.push(width);
    }
    let mut best = (lb, max_alpha_for_sigma(it, d, th, lb));
    for sigma in [lb + 0.5 * width, lb + width] {
        let alpha = max_alpha_for_sigma(it, d, th, sigma);
        if alpha > best.1 {
            best = (sigma, alpha);
        }
    }
    SigmaSelection {
        sigma: best.0,
        alpha: best.1,
        widths,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn path(v: f64, vdot: f64, vddot: f64, a: f64) -> f64 {
        v - vdot * a.sin() + vddot * (1.0 - a.cos())
    }

    #[test]
    fn both_derivatives_zero() {
        assert_eq!(alpha_x_case(1.0, 0.5, 0.0, 0.0), FRAC_PI_2);
        assert_eq!(alpha_s_case(1.0, 0.5, 0.0, 0.0), FRAC_PI_2);
    }

    #[test]
    fn pure_sine_case() {
        assert!((alpha_x_case(1.0, 0.5, 1.0, 0.0) - PI / 6.0).abs() < 1e-15);
        assert_eq!(alpha_x_case(1.0, 0.5, 0.4, 0.0), FRAC_PI_2);
    }

    #[test]
    fn pure_cosine_case() {
        // 1 − 0.5 − 1·(1 − cos a) = 0 at cos a = 0.5
        assert!((alpha_x_case(1.0, 0.5, 0.0, -1.0) - PI / 3.0).abs() < 1e-15);
        assert_eq!(alpha_x_case(1.0, 0.5, 0.0, 1.0), FRAC_PI_2);
    }

    #[test]
    fn decreasing_first_increasing_second_is_free() {
        assert_eq!(alpha_x_case(1.0, 0.5, -1.0, 1.0), FRAC_PI_2);
        assert_eq!(alpha_s_case(1.0, 0.5, -3.0, 0.2), FRAC_PI_2);
    }

    #[test]
    fn positive_positive_case() {
        // w + ẍ = R exactly: the path only touches the floor at π/2.
        assert_eq!(alpha_x_case(1.0, 0.9, 0.3, 0.4), FRAC_PI_2);
        let a = alpha_x_case(1.0, 0.5, 1.0, 0.2);
        assert!(a < FRAC_PI_2);
        assert!((path(1.0, 1.0, 0.2, a) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn positive_negative_case() {
        let a = alpha_x_case(1.0, 0.5, 0.3, -0.8);
        assert!(a < FRAC_PI_2);
        assert!((path(1.0, 0.3, -0.8, a) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn negative_negative_case() {
        // −ẋ sin a lifts the path early, ẍ(1 − cos a) drags it down later.
        let a = alpha_x_case(1.0, 0.1, -0.2, -3.0);
        assert!(a < FRAC_PI_2);
        assert!((path(1.0, -0.2, -3.0, a) - 0.1).abs() < 1e-12);
    }

    #[test]
    fn violated_floor_gives_zero() {
        assert_eq!(alpha_x_case(0.1, 0.2, 1.0, 1.0), 0.0);
    }
}
