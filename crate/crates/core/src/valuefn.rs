//! The value function `V*(x, t) = sup_τ E[X_τ | X_t = x]`.
//!
//! With `y = (x − γ(1))/b(t)` the value is `γ(1) + f(y) b(t)` below the
//! barrier and `x` on or above it, where
//!
//! ```text
//! f(y) = h₁(−αβy) / h₁(−αβ)     (α > 0)
//! f(y) = e^{y−1}                (α = 0)
//! ```
//!
//! for `y < 1`, continued by `f(y) = y` for `y ≥ 1`.

use std::io::Write;

use crate::curves::CurveSpec;
use crate::error::{domain, Result};
use crate::freeboundary;
use crate::real;
use crate::specfun::{h1, ln_h1, SpecialFnContext};

#[derive(Debug, Clone)]
pub struct ValueContext {
    alpha: f64,
    beta: f64,
    specfun: Option<SpecialFnContext>,
    normalization: f64,
    ln_normalization: f64,
    curve: CurveSpec,
}

impl ValueContext {
    /// Builds the context with `β = β(α)` from the free-boundary solver.
    pub fn new(alpha: f64, curve: CurveSpec) -> Result<Self> {
        let beta = freeboundary::beta_of_alpha(alpha)?;
        if alpha == 0.0 {
            return Ok(Self {
                alpha,
                beta,
                specfun: None,
                normalization: 1.0,
                ln_normalization: 0.0,
                curve,
            });
        }
        let ctx = SpecialFnContext::new(alpha)?;
        let ln_normalization = ln_h1(&ctx, -alpha * beta)?;
        Ok(Self {
            alpha,
            beta,
            specfun: Some(ctx),
            normalization: ln_normalization.exp(),
            ln_normalization,
            curve,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn curve(&self) -> &CurveSpec {
        &self.curve
    }

    /// `h₁(−αβ)`; 1 for α = 0. Underflows to 0 for very small α, where
    /// [`ValueContext::f_reduced`] works from the logarithm instead.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// The reduced solution `f(y)`.
    pub fn f_reduced(&self, y: f64) -> Result<f64> {
        if !y.is_finite() {
            return Err(domain(format!("y must be finite, got {y}")));
        }
        if y >= 1.0 {
            return Ok(y);
        }
        match &self.specfun {
            None => Ok((y - 1.0).exp()),
            Some(ctx) => {
                let z = -self.alpha * self.beta * y;
                let v = h1(ctx, z)?;
                if v.is_normal() && self.normalization.is_normal() {
                    Ok(v / self.normalization)
                } else {
                    Ok((ln_h1(ctx, z)? - self.ln_normalization).exp())
                }
            }
        }
    }

    /// `V*(x, t)`. At `t = 1` this returns `max(x, γ(1))`, the limit from
    /// `t < 1`; the only reachable state there is `x = γ(1)`.
    pub fn value(&self, x: f64, t: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(domain(format!("x must be finite, got {x}")));
        }
        let b = self.curve.b_value(t)?;
        let g1 = self.curve.gamma_final();
        if t == 1.0 {
            return Ok(x.max(g1));
        }
        if x >= b + g1 {
            return Ok(x);
        }
        Ok(g1 + self.f_reduced((x - g1) / b)? * b)
    }

    /// True when `x` is in the stopping region `x ≥ γ(t)`.
    pub fn stop_region(&self, x: f64, t: f64) -> Result<bool> {
        Ok(x >= self.curve.gamma(t)?)
    }

    /// Writes `x,t,value,region` for every point of the grid `xs × ts`,
    /// `t`-major.
    pub fn write_surface_csv<W: Write>(&self, xs: &[f64], ts: &[f64], out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["x", "t", "value", "region"])?;
        for &t in ts {
            for &x in xs {
                let v = self.value(x, t)?;
                let region = if self.stop_region(x, t)? {
                    "stop"
                } else {
                    "continue"
                };
                wtr.write_record([real(x), real(t), real(v), region.to_string()])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }
}
