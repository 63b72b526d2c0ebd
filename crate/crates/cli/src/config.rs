//! Flag validation. Everything here runs before any command does real work.

use bridgestop::freeboundary::ALPHA_MAX;
use bridgestop::mc::{MIN_PATHS, MIN_STEPS};
use bridgestop::{beta_of_alpha, CurveSpec};
use serde::Serialize;

use crate::args::{
    BetaArgs, CurveArgs, CurveKind, Format, OutputArgs, PathsArgs, ValueArgs, VerifyArgs,
};
use crate::error::{usage, Result};

/// A curve resolved for one α, with the scale actually used.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedCurve {
    pub alpha: f64,
    pub family: CurveKind,
    pub scale: Option<f64>,
    pub exponent: Option<f64>,
    pub gamma_final: f64,
    #[serde(skip)]
    pub spec: CurveSpec,
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be finite, got {v}")))
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha.is_finite() && (0.0..=ALPHA_MAX).contains(&alpha)) {
        return Err(usage(format!(
            "--alpha must lie in [0, {ALPHA_MAX}], got {alpha}"
        )));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && (0.0..1.0).contains(&t)) {
        return Err(usage(format!("--t must lie in [0, 1), got {t}")));
    }
    Ok(())
}

fn check_format(output: &OutputArgs, allowed: &[Format], command: &str) -> Result<()> {
    if allowed.contains(&output.format) {
        Ok(())
    } else {
        Err(usage(
            format!("`{command}` does not support --format {:?}", output.format).to_lowercase(),
        ))
    }
}

impl CurveArgs {
    fn check_flags(&self) -> Result<()> {
        if let Some(c) = self.curve_scale {
            if !(c.is_finite() && c > 0.0) {
                return Err(usage(format!("--curve-scale must be positive, got {c}")));
            }
        }
        if let Some(g) = self.gamma_final {
            finite("gamma-final", g)?;
        }
        match self.curve {
            CurveKind::Power => {
                if self.curve_exp.is_none() {
                    return Err(usage("--curve power needs --curve-exp"));
                }
            }
            _ if self.curve_exp.is_some() => {
                return Err(usage("--curve-exp only applies to --curve power"));
            }
            _ => {}
        }
        match self.curve {
            CurveKind::File => {
                if self.curve_file.is_none() {
                    return Err(usage("--curve file needs --curve-file"));
                }
                if self.curve_scale.is_some() || self.gamma_final.is_some() {
                    return Err(usage(
                        "--curve-scale and --gamma-final do not apply to --curve file; γ(1) comes from the last row",
                    ));
                }
            }
            _ if self.curve_file.is_some() => {
                return Err(usage("--curve-file needs --curve file"));
            }
            _ => {}
        }
        Ok(())
    }

    /// Builds and validates the curve for `alpha`. Any violation is a usage
    /// error.
    pub fn resolve(&self, alpha: f64) -> Result<ResolvedCurve> {
        self.check_flags()?;
        let g1 = self.gamma_final.unwrap_or(0.0);
        let (spec, scale, exponent) = match self.curve {
            CurveKind::Sqrt => {
                let c = match self.curve_scale {
                    Some(c) => c,
                    None => beta_of_alpha(alpha)?,
                };
                (CurveSpec::sqrt(c, g1), Some(c), None)
            }
            CurveKind::Power => {
                let c = self.curve_scale.unwrap_or(1.0);
                let p = self.curve_exp.unwrap_or_default();
                (CurveSpec::power(c, p, g1), Some(c), Some(p))
            }
            CurveKind::Linear => {
                let c = self.curve_scale.unwrap_or(1.0);
                (CurveSpec::linear(c, g1), Some(c), None)
            }
            CurveKind::File => {
                let path = self.curve_file.as_ref().expect("checked above");
                (CurveSpec::from_csv_path(path), None, None)
            }
        };
        let spec = spec.map_err(|e| usage(format!("invalid curve: {e}")))?;
        let report = spec.validate();
        if !report.is_valid() {
            let list: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
            return Err(usage(format!("invalid curve: {}", list.join("; "))));
        }
        Ok(ResolvedCurve {
            alpha,
            family: self.curve,
            scale,
            exponent,
            gamma_final: spec.gamma_final(),
            spec,
        })
    }
}

impl BetaArgs {
    /// The α grid: the single `--alpha` or `points` uniform values.
    pub fn alphas(&self) -> Result<Vec<f64>> {
        check_format(
            &self.output,
            &[Format::Csv, Format::Json, Format::Svg],
            "beta",
        )?;
        if let Some(a) = self.alpha {
            check_alpha(a)?;
            return Ok(vec![a]);
        }
        check_alpha(self.alpha_min)?;
        check_alpha(self.alpha_max)?;
        if self.alpha_min >= self.alpha_max {
            return Err(usage("--alpha-min must be below --alpha-max"));
        }
        if self.points < 2 {
            return Err(usage("--points must be at least 2"));
        }
        let step = (self.alpha_max - self.alpha_min) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.alpha_max
                } else {
                    self.alpha_min + i as f64 * step
                }
            })
            .collect())
    }
}

impl ValueArgs {
    pub fn validate(&self) -> Result<ResolvedCurve> {
        check_format(&self.output, &[Format::Csv, Format::Json], "value")?;
        check_alpha(self.alpha)?;
        finite("x", self.x)?;
        if !(self.t.is_finite() && (0.0..=1.0).contains(&self.t)) {
            return Err(usage(format!("--t must lie in [0, 1], got {}", self.t)));
        }
        self.curve.resolve(self.alpha)
    }
}

impl PathsArgs {
    pub fn validate(&self) -> Result<Vec<ResolvedCurve>> {
        check_format(
            &self.output,
            &[Format::Csv, Format::Json, Format::Svg],
            "paths",
        )?;
        if self.alpha.is_empty() {
            return Err(usage("--alpha needs at least one value"));
        }
        finite("x", self.x)?;
        check_time(self.t)?;
        if self.paths == 0 {
            return Err(usage("--paths must be at least 1"));
        }
        if self.steps == 0 {
            return Err(usage("--steps must be at least 1"));
        }
        self.alpha
            .iter()
            .map(|&a| {
                check_alpha(a)?;
                self.curve.resolve(a)
            })
            .collect()
    }
}

impl VerifyArgs {
    pub fn validate(&self) -> Result<ResolvedCurve> {
        check_format(&self.output, &[Format::Csv, Format::Json], "verify")?;
        check_alpha(self.alpha)?;
        finite("x", self.x)?;
        check_time(self.t)?;
        if self.scales.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(usage("--scales must all be positive"));
        }
        if !self.scales.contains(&1.0) {
            return Err(usage("--scales must include 1"));
        }
        if self.paths < MIN_PATHS {
            return Err(usage(format!("--paths must be at least {MIN_PATHS}")));
        }
        if self.steps < MIN_STEPS {
            return Err(usage(format!("--steps must be at least {MIN_STEPS}")));
        }
        self.curve.resolve(self.alpha)
    }
}
