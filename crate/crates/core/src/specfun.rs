//! Special functions for the free-boundary problem.
//!
//! The decaying solution of `h'' = z h' + 2ξ h` (ξ = 1/(2α²)) is
//!
//! ```text
//! h₁(z) = √π/2^ξ · [ M(ξ, ½, z²/2)/Γ(½+ξ) − z√2 · M(ξ+½, 3/2, z²/2)/Γ(ξ) ]
//!       = 1/Γ(2ξ) · ∫₀^∞ t^{2ξ−1} exp(−t²/2 − z t) dt
//! ```
//!
//! normalized so that `h₁(z) z^{2ξ} → 1` as `z → ∞`. The Kummer form is
//! exact but the two terms grow like `e^{z²/2}` while `h₁` decays, so it is
//! used only while the subtraction keeps at least 13 digits. Elsewhere the
//! integral form (all-positive integrand) is evaluated by adaptive
//! quadrature, and far out the asymptotic series takes over.
//!
//! At α = 1, `h₁` is the Mills ratio `(1 − Φ(z))/φ(z)`.

use crate::error::{domain, Error, Result};
use crate::quad;

use std::f64::consts::{LN_2, PI};

/// Upper end of the region where the Kummer series form is tried.
pub const SERIES_SWITCH: f64 = 4.0;

/// Beyond this point the asymptotic expansion is used when it certifies.
pub const ASYMPTOTIC_SWITCH: f64 = 50.0;

/// Lowest supported argument. The free-boundary problem needs `z ≥ −αβ(α)`;
/// the generous limit leaves room for the uniqueness scans.
pub const Z_MIN: f64 = -30.0;

const KUMMER_MAX_TERMS: usize = 100_000;
const KUMMER_REL_STOP: f64 = 1e-17;

/// Largest tolerated ratio `(|T₁| + |T₂|)/|T₁ − T₂|` in the Kummer form.
const MAX_CANCELLATION: f64 = 1e3;

const QUAD_REL_TOL: f64 = 1e-14;
const QUAD_MAX_SEGMENTS: usize = 4000;
const CERTIFIED_REL_ERROR: f64 = 1e-9;

/// Parameters shared by `h₁` evaluations for one value of α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnContext {
    alpha: f64,
    xi: f64,
}

impl SpecialFnContext {
    /// Builds the context for `α > 0`. The α = 0 problem has the closed form
    /// `e^{y−1}` and needs no special functions.
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(domain(format!(
                "special-function context needs alpha > 0, got {alpha}"
            )));
        }
        Ok(Self {
            alpha,
            xi: 1.0 / (2.0 * alpha * alpha),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// ξ = 1/(2α²).
    pub fn xi(&self) -> f64 {
        self.xi
    }
}

/// Kummer's confluent hypergeometric function `M(a, b, z) = ₁F₁(a; b; z)` by
/// direct power series.
///
/// Accurate to ~1e−15 relative when all terms are positive (`a, b, z ≥ 0`);
/// for negative `z` the series alternates and accuracy degrades with `|z|`.
pub fn kummer_m(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(domain(format!(
            "kummer_m arguments must be finite: a={a}, b={b}, z={z}"
        )));
    }
    if b <= 0.0 && b == b.floor() {
        return Err(domain(format!("kummer_m undefined for b = {b}")));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut small_run = 0;
    for n in 0..KUMMER_MAX_TERMS {
        let n = n as f64;
        term *= (a + n) / (b + n) * z / (n + 1.0);
        sum += term;
        if !(term.is_finite() && sum.is_finite()) {
            return Err(Error::Overflow(format!(
                "kummer_m({a}, {b}, {z}) series overflowed"
            )));
        }
        if term.abs() <= KUMMER_REL_STOP * sum.abs() {
            small_run += 1;
            if small_run >= 3 {
                return Ok(sum);
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergence(format!(
        "kummer_m({a}, {b}, {z}) did not converge in {KUMMER_MAX_TERMS} terms"
    )))
}

// Coefficients B_{2k} / (2k (2k−1)) of the Stirling series.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// `ln Γ(x)` for `x > 0`.
///
/// Arguments below 10 are shifted up by the recurrence `Γ(x+1) = xΓ(x)`; the
/// Stirling series truncated after eight terms is then good to ~1e−18.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || x.is_infinite() {
        return Err(domain(format!("log_gamma needs finite x > 0, got {x}")));
    }
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < 10.0 {
        product *= shifted;
        shifted += 1.0;
    }
    let inv = 1.0 / shifted;
    let inv2 = inv * inv;
    let series = STIRLING.iter().rev().fold(0.0, |acc, &c| acc * inv2 + c) * inv;
    let stirling = (shifted - 0.5) * shifted.ln() - shifted + 0.5 * (2.0 * PI).ln() + series;
    Ok(stirling - product.ln())
}

/// `h₁(z)`, the decaying solution normalized to `h₁(z) z^{2ξ} → 1`.
pub fn h1(ctx: &SpecialFnContext, z: f64) -> Result<f64> {
    check_argument(z)?;
    let q = 2.0 * ctx.xi;
    if z > ASYMPTOTIC_SWITCH {
        if let Some(v) = scaled_pcf_asymptotic(q, z) {
            return Ok(v);
        }
    } else if z <= SERIES_SWITCH {
        if let Some(v) = h1_series(ctx, z)? {
            return Ok(v);
        }
    }
    scaled_pcf_integral(q, z)
}

/// `h₁'(z)`, via the Kummer derivative identity `dM(a,b,w)/dw = (a/b) M(a+1,b+1,w)`
/// in the series region and `h₁' = −2ξ · I_{2ξ+1}` elsewhere.
pub fn h1_prime(ctx: &SpecialFnContext, z: f64) -> Result<f64> {
    check_argument(z)?;
    let q = 2.0 * ctx.xi;
    if z > ASYMPTOTIC_SWITCH {
        if let Some(v) = scaled_pcf_asymptotic(q + 1.0, z) {
            return Ok(-q * v);
        }
    } else if z <= SERIES_SWITCH {
        if let Some(v) = h1_prime_series(ctx, z)? {
            return Ok(v);
        }
    }
    Ok(-q * scaled_pcf_integral(q + 1.0, z)?)
}

/// `ln h₁(z)`, finite even where `h₁` itself underflows (large ξ).
pub fn ln_h1(ctx: &SpecialFnContext, z: f64) -> Result<f64> {
    let v = h1(ctx, z)?;
    if v.is_normal() {
        return Ok(v.ln());
    }
    certified_ln(2.0 * ctx.xi, z)
}

/// The logarithmic derivative `h₁'(z)/h₁(z)`.
pub fn h1_log_derivative(ctx: &SpecialFnContext, z: f64) -> Result<f64> {
    let (v, d) = (h1(ctx, z)?, h1_prime(ctx, z)?);
    if v.is_normal() && d.is_normal() {
        return Ok(d / v);
    }
    let q = 2.0 * ctx.xi;
    Ok(-q * (certified_ln(q + 1.0, z)? - certified_ln(q, z)?).exp())
}

fn certified_ln(q: f64, z: f64) -> Result<f64> {
    let (ln_value, rel_err) = ln_scaled_pcf_integral(q, z)?;
    if rel_err > CERTIFIED_REL_ERROR {
        return Err(Error::Precision(format!(
            "h1 quadrature at q={q}, z={z} reached only {rel_err:.1e} relative accuracy"
        )));
    }
    Ok(ln_value)
}

fn check_argument(z: f64) -> Result<()> {
    if !z.is_finite() || z < Z_MIN {
        return Err(domain(format!(
            "h1 argument must be finite and >= {Z_MIN}, got {z}"
        )));
    }
    Ok(())
}

/// Log prefactors `√π/(2^ξ Γ(½+ξ))` and `√(2π)/(2^ξ Γ(ξ))` of the Kummer form.
fn kummer_prefactors(xi: f64) -> Result<(f64, f64)> {
    let half_ln_pi = 0.5 * PI.ln();
    let even = half_ln_pi - xi * LN_2 - log_gamma(xi + 0.5)?;
    let odd = half_ln_pi + 0.5 * LN_2 - xi * LN_2 - log_gamma(xi)?;
    Ok((even, odd))
}

/// Product `e^{ln_c} · m` without overflowing the prefactor on its own.
fn scaled(ln_c: f64, m: f64) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        m.signum() * (ln_c + m.abs().ln()).exp()
    }
}

/// Combines the Kummer terms, or `None` if the difference cannot be trusted.
fn combine(first: f64, second: f64) -> Option<f64> {
    let value = first - second;
    let magnitude = first.abs() + second.abs();
    if !value.is_finite() || value == 0.0 || magnitude > MAX_CANCELLATION * value.abs() {
        None
    } else {
        Some(value)
    }
}

fn kummer_or_none(a: f64, b: f64, w: f64) -> Result<Option<f64>> {
    match kummer_m(a, b, w) {
        Ok(m) => Ok(Some(m)),
        Err(Error::Overflow(_)) | Err(Error::NonConvergence(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn h1_series(ctx: &SpecialFnContext, z: f64) -> Result<Option<f64>> {
    let xi = ctx.xi;
    let w = 0.5 * z * z;
    let (ln_even, ln_odd) = kummer_prefactors(xi)?;
    let (Some(m_even), Some(m_odd)) = (
        kummer_or_none(xi, 0.5, w)?,
        kummer_or_none(xi + 0.5, 1.5, w)?,
    ) else {
        return Ok(None);
    };
    let even = scaled(ln_even, m_even);
    let odd = scaled(ln_odd, z * m_odd);
    Ok(combine(even, odd).filter(|v| *v > 0.0))
}

fn h1_prime_series(ctx: &SpecialFnContext, z: f64) -> Result<Option<f64>> {
    let xi = ctx.xi;
    let w = 0.5 * z * z;
    let (ln_even, ln_odd) = kummer_prefactors(xi)?;
    let (Some(m1), Some(m2), Some(m3)) = (
        kummer_or_none(xi + 1.0, 1.5, w)?,
        kummer_or_none(xi + 0.5, 1.5, w)?,
        kummer_or_none(xi + 1.5, 2.5, w)?,
    ) else {
        return Ok(None);
    };
    // d/dz M(ξ, ½, z²/2) = 2ξ z M(ξ+1, 3/2, z²/2)
    let even = scaled(ln_even, 2.0 * xi * z * m1);
    // d/dz [z M(ξ+½, 3/2, z²/2)] = M(ξ+½, 3/2, ·) + z²(2ξ+1)/3 · M(ξ+3/2, 5/2, ·)
    let odd = scaled(ln_odd, m2 + z * z * (2.0 * xi + 1.0) / 3.0 * m3);
    Ok(combine(even, odd).filter(|v| *v < 0.0))
}

/// Asymptotic expansion of `I_q(z) = 1/Γ(q) ∫₀^∞ t^{q−1} e^{−t²/2 − zt} dt`:
///
/// `I_q(z) ~ z^{−q} Σ_k (−½)^k (q)_{2k} / (k! z^{2k})`.
///
/// Returns `None` unless the smallest term falls below 1e−12 of the sum.
pub(crate) fn scaled_pcf_asymptotic(q: f64, z: f64) -> Option<f64> {
    if z <= 0.0 {
        return None;
    }
    let z2 = z * z;
    let mut sum = 1.0;
    let mut term: f64 = 1.0;
    for k in 0..200 {
        let kf = k as f64;
        let next = -term * (q + 2.0 * kf) * (q + 2.0 * kf + 1.0) / (2.0 * (kf + 1.0) * z2);
        if next.abs() >= term.abs() {
            // Divergent tail: stop at the smallest term.
            break;
        }
        sum += next;
        term = next;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    if term.abs() > 1e-12 * sum.abs() {
        return None;
    }
    Some((-q * z.ln()).exp() * sum)
}

/// `I_q(z)` by quadrature, for any `q > 0` and `z ≥ Z_MIN`.
///
/// The integral is split at `a = min(½, ½/|z|)`. On `[0, a]` the factor
/// `exp(−t²/2 − zt)` is expanded in its Taylor series and integrated against
/// `t^{q−1}` term by term, which absorbs the endpoint singularity for `q < 1`.
/// The smooth remainder on `[a, T]` goes to adaptive Gauss–Kronrod, scaled by
/// the integrand's maximum.
pub(crate) fn scaled_pcf_integral(q: f64, z: f64) -> Result<f64> {
    let ln_value = certified_ln(q, z)?;
    let value = ln_value.exp();
    if !value.is_finite() {
        return Err(Error::Overflow(format!(
            "h1 value at z={z} exceeds f64 range"
        )));
    }
    Ok(value)
}

fn ln_scaled_pcf_integral(q: f64, z: f64) -> Result<(f64, f64)> {
    let log_integrand = |t: f64| (q - 1.0) * t.ln() - 0.5 * t * t - z * t;
    let a = if z.abs() > 1.0 { 0.5 / z.abs() } else { 0.5 };

    // Largest value of the log-integrand on [a, ∞): either at a or at the
    // larger root of t² + z t − (q−1) = 0.
    let disc = z * z + 4.0 * (q - 1.0);
    let stationary = if disc < 0.0 {
        None
    } else if z <= 0.0 {
        Some(0.5 * (-z + disc.sqrt()))
    } else if q > 1.0 {
        Some(2.0 * (q - 1.0) / (z + disc.sqrt()))
    } else {
        None
    };
    let (mut peak_t, mut peak) = (a, log_integrand(a));
    if let Some(t) = stationary.filter(|&t| t > a) {
        let v = log_integrand(t);
        if v > peak {
            peak_t = t;
            peak = v;
        }
    }

    let mut step = 1.0;
    let mut upper = peak_t + step;
    while log_integrand(upper) > peak - 46.0 {
        step *= 2.0;
        upper = peak_t + step;
    }

    let main = quad::integrate(
        |t| (log_integrand(t) - peak).exp(),
        a,
        upper,
        &[peak_t],
        QUAD_REL_TOL,
        QUAD_MAX_SEGMENTS,
    );

    // ∫₀^a t^{q−1} Σ c_k t^k dt with e_k = c_k a^k,
    // (k+1) e_{k+1} = −z a e_k − a² e_{k−1}.
    let mut near = 1.0 / q;
    let (mut prev, mut cur) = (0.0, 1.0);
    let mut quiet = 0;
    for k in 0..400 {
        let kf = k as f64;
        let next = (-z * a * cur - a * a * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
        let contribution = cur / (q + kf + 1.0);
        near += contribution;
        if contribution.abs() <= 1e-18 * near.abs() {
            quiet += 1;
            if quiet >= 2 {
                break;
            }
        } else {
            quiet = 0;
        }
    }
    let near_scaled = near * (q * a.ln() - peak).exp();

    let total = main.value + near_scaled;
    if !(total > 0.0) {
        return Err(Error::Precision(format!(
            "h1 quadrature at q={q}, z={z} produced non-positive mass {total}"
        )));
    }
    let ln_value = peak + total.ln() - log_gamma(q)?;
    Ok((ln_value, main.abs_error / total))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mills(z: f64) -> f64 {
        // (1 − Φ(z))/φ(z) = √(π/2) · erfc(z/√2) · e^{z²/2}
        (PI / 2.0).sqrt() * libm::erfc(z / 2f64.sqrt()) * (0.5 * z * z).exp()
    }

    #[test]
    fn kummer_trivial_values() {
        assert_eq!(kummer_m(0.7, 0.5, 0.0).unwrap(), 1.0);
        let e2 = kummer_m(0.5, 0.5, 2.0).unwrap();
        assert!((e2 - 2f64.exp()).abs() < 1e-14 * e2);
    }

    #[test]
    fn kummer_erf_identity() {
        // M(½, 3/2, −x²) = √π erf(x) / (2x)
        let expected = PI.sqrt() * libm::erf(1.0) / 2.0;
        let got = kummer_m(0.5, 1.5, -1.0).unwrap();
        assert!((got - expected).abs() < 1e-14, "{got} vs {expected}");
        assert!((got - 0.746824).abs() < 1e-6);
    }

    #[test]
    fn kummer_rejects_nonpositive_integer_b() {
        assert!(matches!(kummer_m(1.0, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(kummer_m(1.0, -3.0, 1.0), Err(Error::Domain(_))));
        assert!(kummer_m(1.0, -2.5, 1.0).is_ok());
    }

    #[test]
    fn kummer_overflow_is_reported() {
        assert!(matches!(kummer_m(1.0, 1.0, 800.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn kummer_polynomial_case_terminates() {
        // M(−2, b, z) = 1 − 2z/b + z²/(b(b+1))
        let got = kummer_m(-2.0, 0.5, 3.0).unwrap();
        assert!((got - (1.0 - 12.0 + 9.0 / 0.75)).abs() < 1e-12);
    }

    #[test]
    fn log_gamma_reference_points() {
        assert!(log_gamma(1.0).unwrap().abs() < 1e-14);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-14);
        let half = log_gamma(0.5).unwrap();
        assert!((half - 0.5 * PI.ln()).abs() < 1e-14);
        // Γ(5/2) = (3/2)(1/2)√π
        let expected = (0.75 * PI.sqrt()).ln();
        assert!((log_gamma(2.5).unwrap() - expected).abs() < 1e-14);
        assert!((log_gamma(2.5).unwrap() - 0.2846829).abs() < 1e-7);
    }

    #[test]
    fn log_gamma_matches_factorials_and_libm() {
        let mut ln_fact = 0.0;
        for n in 1..170u32 {
            let got = log_gamma(n as f64 + 1.0).unwrap();
            ln_fact += (n as f64).ln();
            assert!(
                (got - ln_fact).abs() <= 1e-13 * ln_fact.abs().max(1.0),
                "n={n}"
            );
        }
        for &x in &[1.0 / 128.0, 0.1, 0.3, 3.7, 12.25, 200.5, 1e4] {
            let expected = libm::lgamma(x);
            let got = log_gamma(x).unwrap();
            assert!(
                (got - expected).abs() <= 1e-13 * expected.abs().max(1.0),
                "x={x}"
            );
        }
    }

    #[test]
    fn log_gamma_domain() {
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.5).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn context_rejects_alpha_zero() {
        assert!(SpecialFnContext::new(0.0).is_err());
        assert!(SpecialFnContext::new(-1.0).is_err());
        let ctx = SpecialFnContext::new(0.5).unwrap();
        assert_eq!(ctx.xi(), 2.0);
    }

    #[test]
    fn h1_mills_examples() {
        let ctx = SpecialFnContext::new(1.0).unwrap();
        assert!((h1(&ctx, 0.0).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-13);
        assert!((h1(&ctx, 1.0).unwrap() - mills(1.0)).abs() < 1e-12);
        assert!((h1(&ctx, 1.0).unwrap() - 0.6556795).abs() < 1e-7);
        let z = -0.839924;
        assert!((h1(&ctx, z).unwrap() - mills(z)).abs() < 1e-12);
        // Mills oracle: Φ(0.839924)/φ(0.839924) = 2.8517607
        assert!((h1(&ctx, z).unwrap() - 2.851_760_7).abs() < 1e-7);
    }

    #[test]
    fn h1_prime_mills_examples() {
        let ctx = SpecialFnContext::new(1.0).unwrap();
        assert!((h1_prime(&ctx, 0.0).unwrap() + 1.0).abs() < 1e-13);
        // R'(z) = z R(z) − 1
        let expected = mills(1.0) - 1.0;
        assert!((h1_prime(&ctx, 1.0).unwrap() - expected).abs() < 1e-12);
        assert!((expected + 0.3443205).abs() < 1e-7);
    }

    #[test]
    fn integral_form_matches_series_form() {
        for &alpha in &[0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
            let ctx = SpecialFnContext::new(alpha).unwrap();
            let q = 2.0 * ctx.xi();
            let mut z = -1.0;
            while z <= 4.0 {
                if let Some(series) = h1_series(&ctx, z).unwrap() {
                    let integral = scaled_pcf_integral(q, z).unwrap();
                    assert!(
                        (series - integral).abs() <= 1e-10 * integral,
                        "alpha={alpha} z={z}: {series} vs {integral}"
                    );
                }
                if let Some(series) = h1_prime_series(&ctx, z).unwrap() {
                    let integral = -q * scaled_pcf_integral(q + 1.0, z).unwrap();
                    assert!(
                        (series - integral).abs() <= 1e-10 * integral.abs(),
                        "h1' alpha={alpha} z={z}: {series} vs {integral}"
                    );
                }
                z += 0.125;
            }
        }
    }

    #[test]
    fn integral_form_matches_mills_ratio() {
        let mut z = -3.0;
        while z <= 30.0 {
            let got = scaled_pcf_integral(1.0, z).unwrap();
            let expected = mills(z);
            assert!(
                (got - expected).abs() <= 1e-11 * expected,
                "z={z}: {got} vs {expected}"
            );
            z += 0.25;
        }
    }

    #[test]
    fn asymptotic_agrees_with_integral_at_switch() {
        for &q in &[1.0 / 64.0, 0.5, 1.0, 4.0] {
            let asym = scaled_pcf_asymptotic(q, 50.5).unwrap();
            let integral = scaled_pcf_integral(q, 50.5).unwrap();
            assert!((asym - integral).abs() <= 1e-11 * integral, "q={q}");
        }
        // Not certified when q is large relative to z.
        assert!(scaled_pcf_asymptotic(400.0, 51.0).is_none());
    }

    #[test]
    fn h1_far_field_for_large_xi_uses_quadrature() {
        let ctx = SpecialFnContext::new(0.05).unwrap();
        let v = h1(&ctx, 60.0).unwrap();
        let direct = scaled_pcf_integral(400.0, 60.0).unwrap();
        assert_eq!(v, direct);
    }

    #[test]
    fn h1_rejects_out_of_domain() {
        let ctx = SpecialFnContext::new(1.0).unwrap();
        assert!(h1(&ctx, f64::NAN).is_err());
        assert!(h1(&ctx, -31.0).is_err());
        assert!(h1_prime(&ctx, f64::INFINITY).is_err());
    }
}
