//! The free-boundary constant β(α).
//!
//! Smooth fit at the barrier reduces to finding the unique negative root
//! `x_α` of
//!
//! ```text
//! g(x) = x h₁'(x) − h₁(x)
//! ```
//!
//! (a critical point of `h₁(x)/x`), after which `β(α) = −x_α/α`. For α = 0
//! the problem is solved by `f(y) = e^{y−1}` and `β(0) = 1`.
//!
//! The optimal barrier is `γ(t)` itself, whatever the value of α.

use rayon::prelude::*;
use serde::Serialize;

use crate::curves::CurveSpec;
use crate::error::{domain, Error, Result};
use crate::real;
use crate::specfun::{h1, h1_log_derivative, h1_prime, SpecialFnContext};

/// Largest supported α. Beyond it ξ = 1/(2α²) < 1/128.
pub const ALPHA_MAX: f64 = 8.0;

const BRACKET_START: f64 = -0.25;
const MAX_DOUBLINGS: usize = 60;
const ROOT_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundarySolution {
    pub alpha: f64,
    /// Root of `x h₁'(x) = h₁(x)`; `None` for α = 0.
    pub x_alpha: Option<f64>,
    pub beta: f64,
    /// `g(x_α)`.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(domain(format!(
            "alpha must be finite and >= 0, got {alpha}"
        )));
    }
    if alpha > ALPHA_MAX {
        return Err(Error::Range(format!(
            "alpha={alpha} exceeds the supported maximum {ALPHA_MAX}"
        )));
    }
    Ok(())
}

/// `g(x) = x h₁'(x) − h₁(x)`.
pub fn constraint(ctx: &SpecialFnContext, x: f64) -> Result<f64> {
    Ok(x * h1_prime(ctx, x)? - h1(ctx, x)?)
}

/// `g(x)/h₁(x)`: same sign and root as `g`, but free of the underflow that
/// `h₁` suffers for small α.
pub fn normalized_constraint(ctx: &SpecialFnContext, x: f64) -> Result<f64> {
    Ok(x * h1_log_derivative(ctx, x)? - 1.0)
}

/// Solves for `x_α < 0` by geometric bracket expansion from −0.25 followed by
/// Brent's method (bisection safeguarding secant and inverse-quadratic steps).
pub fn solve_x_alpha(alpha: f64) -> Result<BoundarySolution> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Err(domain(
            "solve_x_alpha needs alpha > 0; use beta_of_alpha for alpha = 0",
        ));
    }
    let ctx = SpecialFnContext::new(alpha)?;
    let g = |x: f64| normalized_constraint(&ctx, x);

    // g(0) = −h₁(0) < 0, and g > 0 to the left of the root.
    let (mut lo, mut hi) = (BRACKET_START, 0.0);
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    let mut doublings = 0;
    while g_lo < 0.0 {
        if doublings == MAX_DOUBLINGS {
            return Err(Error::Bracket(format!(
                "no sign change of x h1'(x) - h1(x) found down to x={lo} for alpha={alpha}"
            )));
        }
        hi = lo;
        g_hi = g_lo;
        lo *= 2.0;
        g_lo = g(lo)?;
        doublings += 1;
    }
    let bracket = (lo, hi);
    let (x_alpha, iterations) = brent(&g, lo, hi, g_lo, g_hi)?;
    let residual = constraint(&ctx, x_alpha)?;
    Ok(BoundarySolution {
        alpha,
        x_alpha: Some(x_alpha),
        beta: -x_alpha / alpha,
        residual,
        bracket,
        iterations,
    })
}

/// β(α): exactly 1 at α = 0, otherwise `−x_α/α`.
pub fn beta_of_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(1.0);
    }
    Ok(solve_x_alpha(alpha)?.beta)
}

/// Like [`solve_x_alpha`] but also covering α = 0.
pub fn solve(alpha: f64) -> Result<BoundarySolution> {
    check_alpha(alpha)?;
    if alpha == 0.0 {
        return Ok(BoundarySolution {
            alpha,
            x_alpha: None,
            beta: 1.0,
            residual: 0.0,
            bracket: (0.0, 0.0),
            iterations: 0,
        });
    }
    solve_x_alpha(alpha)
}

/// Solves every α independently (in parallel); output order follows input.
pub fn beta_sweep(alphas: &[f64]) -> Result<Vec<BoundarySolution>> {
    alphas.par_iter().map(|&a| solve(a)).collect()
}

/// Writes `alpha,beta,x_alpha,residual`; `x_alpha` is empty for α = 0.
pub fn write_sweep_csv<W: std::io::Write>(rows: &[BoundarySolution], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["alpha", "beta", "x_alpha", "residual"])?;
    for row in rows {
        wtr.write_record([
            real(row.alpha),
            real(row.beta),
            row.x_alpha.map(real).unwrap_or_default(),
            real(row.residual),
        ])?;
    }
    wtr.flush()?;
    Ok(())
}

/// Points where `g` changes sign on a uniform scan of `[lo, hi]`.
/// Returns the left end of each bracketing step.
pub fn sign_changes(alpha: f64, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    let ctx = SpecialFnContext::new(alpha)?;
    if !(lo < hi && step > 0.0) {
        return Err(domain(format!(
            "bad scan range [{lo}, {hi}] with step {step}"
        )));
    }
    let n = ((hi - lo) / step).floor() as usize;
    let mut changes = Vec::new();
    let mut prev = normalized_constraint(&ctx, lo)?;
    for i in 1..=n {
        let x = lo + i as f64 * step;
        let cur = normalized_constraint(&ctx, x)?;
        if (prev > 0.0) != (cur > 0.0) {
            changes.push(x - step);
        }
        prev = cur;
    }
    Ok(changes)
}

/// Optimal stopping barrier `γ(t) = b(t) + γ(1)`; it does not depend on α.
pub fn barrier(curve: &CurveSpec, t: f64) -> Result<f64> {
    curve.gamma(t)
}

fn brent<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> Result<(f64, usize)>
where
    F: Fn(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok((a, 0));
    }
    if fb == 0.0 {
        return Ok((b, 0));
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket(format!(
            "[{a}, {b}] does not bracket a root"
        )));
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol = 2.0 * f64::EPSILON * b.abs() + 0.5 * ROOT_TOL;
        let m = 0.5 * (c - b);
        if m.abs() <= tol || fb == 0.0 {
            return Ok((b, iter));
        }
        if e.abs() >= tol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                // secant
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                // inverse quadratic interpolation
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (tol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol { d } else { tol.copysign(m) };
        fb = f(b)?;
    }
    Err(Error::NonConvergence(format!(
        "root polishing did not converge in {MAX_ITERATIONS} iterations"
    )))
}
