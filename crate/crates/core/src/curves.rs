//! Investor-view curves `γ(t)` and their bridge offsets `b(t) = γ(t) − γ(1)`.
//!
//! The theory needs `b` positive and strictly decreasing on `[0, 1)` with
//! `b(1) = 0`. Tabulated views are interpolated with a shape-preserving
//! (Fritsch–Carlson) piecewise cubic.

use std::fmt;
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use crate::error::{domain, Error, Result};

/// Number of sample points used by [`CurveSpec::validate`].
pub const VALIDATION_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveFamily {
    /// `b(t) = c √(1 − t)`
    Sqrt {
        scale: f64,
    },
    /// `b(t) = c (1 − t)^p`
    Power {
        scale: f64,
        exponent: f64,
    },
    /// `b(t) = c (1 − t)`
    Linear {
        scale: f64,
    },
    Tabulated(MonotoneCubic),
}

/// A view curve: the shape of `b` plus the terminal level `γ(1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSpec {
    family: CurveFamily,
    gamma_final: f64,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidCurve(format!(
            "{name} must be finite and > 0, got {v}"
        )))
    }
}

fn check_time(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(domain(format!("time must lie in [0, 1], got {t}")))
    }
}

impl CurveSpec {
    pub fn sqrt(scale: f64, gamma_final: f64) -> Result<Self> {
        check_positive("curve scale", scale)?;
        Self::with_family(CurveFamily::Sqrt { scale }, gamma_final)
    }

    pub fn power(scale: f64, exponent: f64, gamma_final: f64) -> Result<Self> {
        check_positive("curve scale", scale)?;
        check_positive("curve exponent", exponent)?;
        Self::with_family(CurveFamily::Power { scale, exponent }, gamma_final)
    }

    pub fn linear(scale: f64, gamma_final: f64) -> Result<Self> {
        check_positive("curve scale", scale)?;
        Self::with_family(CurveFamily::Linear { scale }, gamma_final)
    }

    /// Tabulated view from samples `(t_i, γ(t_i))`. Times must run strictly
    /// upward from 0 to 1; `γ(1)` is taken from the last sample.
    ///
    /// Monotonicity of the values is not enforced here; [`validate`](Self::validate)
    /// reports it.
    pub fn tabulated(times: &[f64], gammas: &[f64]) -> Result<Self> {
        let gamma_final = *gammas
            .last()
            .ok_or_else(|| Error::InvalidCurve("tabulated curve has no samples".into()))?;
        let offsets: Vec<f64> = gammas.iter().map(|g| g - gamma_final).collect();
        Self::tabulated_offsets(times, &offsets, gamma_final)
    }

    /// Tabulated view from samples of the offset `b` directly. The final
    /// sample must be `b(1) = 0`; data that stop short of zero are rejected
    /// rather than extrapolated.
    pub fn tabulated_offsets(times: &[f64], offsets: &[f64], gamma_final: f64) -> Result<Self> {
        let last = *offsets
            .last()
            .ok_or_else(|| Error::InvalidCurve("tabulated curve has no samples".into()))?;
        if last.abs() > 1e-12 {
            return Err(Error::InvalidCurve(format!(
                "tabulated offsets must end at b(1) = 0, got {last}"
            )));
        }
        let mut values = offsets.to_vec();
        *values.last_mut().unwrap() = 0.0;
        let interp = MonotoneCubic::new(times.to_vec(), values)?;
        if interp.knots[0] != 0.0 || *interp.knots.last().unwrap() != 1.0 {
            return Err(Error::InvalidCurve(
                "tabulated times must start at 0 and end at 1".into(),
            ));
        }
        Self::with_family(CurveFamily::Tabulated(interp), gamma_final)
    }

    /// Reads a `t,gamma` CSV file.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            t: f64,
            gamma: f64,
        }
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "gamma" {
            return Err(Error::InvalidCurve(format!(
                "curve CSV header must be `t,gamma`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let (mut times, mut gammas) = (Vec::new(), Vec::new());
        for row in rdr.deserialize() {
            let row: Row = row?;
            times.push(row.t);
            gammas.push(row.gamma);
        }
        Self::tabulated(&times, &gammas)
    }

    fn with_family(family: CurveFamily, gamma_final: f64) -> Result<Self> {
        if !gamma_final.is_finite() {
            return Err(Error::InvalidCurve(format!(
                "gamma_final must be finite, got {gamma_final}"
            )));
        }
        Ok(Self {
            family,
            gamma_final,
        })
    }

    pub fn family(&self) -> &CurveFamily {
        &self.family
    }

    /// `γ(1)`.
    pub fn gamma_final(&self) -> f64 {
        self.gamma_final
    }

    /// `b(t) = γ(t) − γ(1)`.
    pub fn b_value(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let rest = 1.0 - t;
        Ok(match &self.family {
            CurveFamily::Sqrt { scale } => scale * rest.sqrt(),
            CurveFamily::Power { scale, exponent } => scale * rest.powf(*exponent),
            CurveFamily::Linear { scale } => scale * rest,
            CurveFamily::Tabulated(interp) => interp.value(t),
        })
    }

    /// `b'(t)`. Errors at `t = 1` when the derivative is unbounded there.
    pub fn b_derivative(&self, t: f64) -> Result<f64> {
        check_time(t)?;
        let rest = 1.0 - t;
        match &self.family {
            CurveFamily::Sqrt { scale } => {
                if rest == 0.0 {
                    return Err(domain("square-root curve has unbounded slope at t = 1"));
                }
                Ok(-scale / (2.0 * rest.sqrt()))
            }
            CurveFamily::Power { scale, exponent } => {
                if rest == 0.0 && *exponent < 1.0 {
                    return Err(domain(
                        "power curve with exponent < 1 has unbounded slope at t = 1",
                    ));
                }
                if *exponent == 1.0 {
                    return Ok(-scale);
                }
                Ok(-scale * exponent * rest.powf(exponent - 1.0))
            }
            CurveFamily::Linear { scale } => Ok(-scale),
            CurveFamily::Tabulated(interp) => Ok(interp.derivative(t)),
        }
    }

    /// `γ(t) = b(t) + γ(1)`.
    pub fn gamma(&self, t: f64) -> Result<f64> {
        Ok(self.b_value(t)? + self.gamma_final)
    }

    /// Checks positivity, strict decrease and `b(1) = 0` on a uniform grid of
    /// [`VALIDATION_POINTS`] times.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = VALIDATION_POINTS;
        let mut previous: Option<f64> = None;
        for i in 0..n {
            let t = if i == n - 1 {
                1.0
            } else {
                i as f64 / (n - 1) as f64
            };
            let b = match self.b_value(t) {
                Ok(b) if b.is_finite() => b,
                _ => {
                    violations.push(Violation::NotFinite { t });
                    previous = None;
                    continue;
                }
            };
            if i < n - 1 && b <= 0.0 {
                violations.push(Violation::NotPositive { t, value: b });
            }
            if let Some(prev) = previous {
                if b >= prev {
                    violations.push(Violation::NotDecreasing { t });
                }
            }
            if i == n - 1 && b.abs() > 1e-12 {
                violations.push(Violation::NonZeroTerminal { value: b });
            }
            previous = Some(b);
        }
        ValidationReport { violations }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotPositive { t: f64, value: f64 },
    NotDecreasing { t: f64 },
    NonZeroTerminal { value: f64 },
    NotFinite { t: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotPositive { t, value } => write!(f, "not positive at t={t} (b={value})"),
            Violation::NotDecreasing { t } => write!(f, "not decreasing at t={t}"),
            Violation::NonZeroTerminal { value } => write!(f, "b(1) = {value} is not 0"),
            Violation::NotFinite { t } => write!(f, "not finite at t={t}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    /// Converts a failed report into an [`Error::InvalidCurve`] listing the
    /// first few violations.
    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            return Ok(());
        }
        let shown: Vec<String> = self
            .violations
            .iter()
            .take(3)
            .map(|v| v.to_string())
            .collect();
        let more = self.violations.len().saturating_sub(3);
        let mut msg = shown.join("; ");
        if more > 0 {
            msg.push_str(&format!("; and {more} more"));
        }
        Err(Error::InvalidCurve(msg))
    }
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(knots: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let n = knots.len();
        if n < 2 || values.len() != n {
            return Err(Error::InvalidCurve(format!(
                "need at least two (t, value) samples of equal length, got {} and {}",
                n,
                values.len()
            )));
        }
        if knots.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidCurve(
                "tabulated samples must be finite".into(),
            ));
        }
        if knots.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidCurve(
                "tabulated times must be strictly increasing".into(),
            ));
        }
        let slopes = pchip_slopes(&knots, &values);
        Ok(Self {
            knots,
            values,
            slopes,
        })
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn segment(&self, t: f64) -> usize {
        let i = self.knots.partition_point(|&k| k <= t);
        i.clamp(1, self.knots.len() - 1) - 1
    }

    pub fn value(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let s = (t - self.knots[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[i]
            + h10 * h * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.knots[i + 1] - self.knots[i];
        let s = (t - self.knots[i]) / h;
        let s2 = s * s;
        let d00 = (6.0 * s2 - 6.0 * s) / h;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = (-6.0 * s2 + 6.0 * s) / h;
        let d11 = 3.0 * s2 - 2.0 * s;
        d00 * self.values[i]
            + d10 * self.slopes[i]
            + d01 * self.values[i + 1]
            + d11 * self.slopes[i + 1]
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        let (a, b) = (delta[i - 1], delta[i]);
        if a == 0.0 || b == 0.0 || a.signum() != b.signum() {
            continue;
        }
        let w1 = 2.0 * h[i] + h[i - 1];
        let w2 = h[i] + 2.0 * h[i - 1];
        d[i] = (w1 + w2) / (w1 / a + w2 / b);
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Three-point end slope, clipped to keep the end segment monotone.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
