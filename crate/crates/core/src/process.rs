//! The generalized bridge and its exact Gaussian transitions.
//!
//! Given `X_t = x`, `X_s` is normal with
//!
//! ```text
//! E[X_s]   = γ(1) + (x − γ(1)) r^{1+α²},                r = b(s)/b(t)
//! Var[X_s] = (b(s)/β)² (1 − r^{2α²}) / α²    (α ≠ 0)
//!          = (b(s)/β)² (−2 ln r)              (α = 0)
//! ```
//!
//! so paths are sampled without discretization error on any grid, including
//! the final step to `s = 1` where the variance vanishes and `X_1 = γ(1)`.
//!
//! Randomness comes from one ChaCha8 stream per path, keyed by the master
//! seed and the path index, so results do not depend on thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::curves::CurveSpec;
use crate::error::{domain, Error, Result};
use crate::freeboundary;
use crate::real;

/// Closest approach to `t = 1` allowed for the Euler sampler, whose
/// diffusion coefficient may blow up there.
pub const EULER_END_GUARD: f64 = 1e-3;

/// Model parameters `(α, β, γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
    curve: CurveSpec,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64, curve: CurveSpec) -> Result<Self> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(domain(format!(
                "alpha must be finite and >= 0, got {alpha}"
            )));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(domain(format!("beta must be finite and > 0, got {beta}")));
        }
        Ok(Self { alpha, beta, curve })
    }

    /// Parameters with `β = β(α)`, the constant that makes `γ` the optimal barrier.
    pub fn optimal(alpha: f64, curve: CurveSpec) -> Result<Self> {
        let beta = freeboundary::beta_of_alpha(alpha)?;
        Self::new(alpha, beta, curve)
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

    pub fn gamma_final(&self) -> f64 {
        self.curve.gamma_final()
    }

    /// Mean-reversion speed θ = α² of the underlying OU process.
    pub fn theta(&self) -> f64 {
        self.alpha * self.alpha
    }

    /// OU volatility σ = √(2/β²).
    pub fn sigma(&self) -> f64 {
        (2.0 / (self.beta * self.beta)).sqrt()
    }

    /// Diffusion coefficient `√(−2 b'(s) b(s) / β²)` of the SDE.
    pub fn diffusion_coefficient(&self, s: f64) -> Result<f64> {
        let b = self.curve.b_value(s)?;
        let db = self.curve.b_derivative(s)?;
        Ok((-2.0 * db * b).max(0.0).sqrt() / self.beta)
    }
}

/// Mean factor `r^{1+α²}` and variance of the transition `t → s`, expressed
/// through the offset ratio `r = b(s)/b(t)`.
fn transition_coefficients(params: &ModelParams, t: f64, s: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&t) || !(0.0..=1.0).contains(&s) || s < t {
        return Err(domain(format!("need 0 <= t <= s <= 1, got t={t}, s={s}")));
    }
    if t == 1.0 {
        return Err(domain("transition from t = 1 is undefined (b(1) = 0)"));
    }
    let bt = params.curve.b_value(t)?;
    if !(bt > 0.0) {
        return Err(domain(format!("b(t) must be positive at t={t}, got {bt}")));
    }
    let bs = params.curve.b_value(s)?;
    if s == t {
        return Ok((1.0, 0.0));
    }
    if bs == 0.0 {
        return Ok((0.0, 0.0));
    }
    let ln_r = (bs / bt).ln();
    let a2 = params.alpha * params.alpha;
    let mean_factor = ((1.0 + a2) * ln_r).exp();
    let scale = (bs / params.beta).powi(2);
    let variance = if a2 == 0.0 {
        scale * (-2.0 * ln_r)
    } else {
        scale * (-(2.0 * a2 * ln_r).exp_m1()) / a2
    };
    Ok((mean_factor, variance.max(0.0)))
}

/// Mean and variance of `X_s` given `X_t = x`.
pub fn mean_var(params: &ModelParams, x: f64, t: f64, s: f64) -> Result<(f64, f64)> {
    let (factor, variance) = transition_coefficients(params, t, s)?;
    let g1 = params.gamma_final();
    if factor == 0.0 {
        return Ok((g1, 0.0));
    }
    Ok((g1 + (x - g1) * factor, variance))
}

/// One draw of `X_s` given `X_t = x`, exact in distribution.
pub fn sample_transition<R: Rng + ?Sized>(
    params: &ModelParams,
    x: f64,
    t: f64,
    s: f64,
    rng: &mut R,
) -> Result<f64> {
    let (mean, variance) = mean_var(params, x, t, s)?;
    if variance == 0.0 {
        return Ok(mean);
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(mean + variance.sqrt() * z)
}

/// The RNG stream for path `index` under master seed `seed`.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A sampled path `(s_i, X_{s_i})`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGrid {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl PathGrid {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.times.iter().copied().zip(self.values.iter().copied())
    }
}

/// Uniform grid of `n_steps` intervals from `t` to 1, with the last point
/// exactly 1.
pub fn uniform_grid(t: f64, n_steps: usize) -> Result<Vec<f64>> {
    if n_steps == 0 {
        return Err(Error::InvalidGrid("need at least one step".into()));
    }
    if !(0.0..1.0).contains(&t) {
        return Err(Error::InvalidGrid(format!(
            "start time must lie in [0, 1), got {t}"
        )));
    }
    let span = 1.0 - t;
    let mut grid: Vec<f64> = (0..n_steps)
        .map(|i| t + span * i as f64 / n_steps as f64)
        .collect();
    grid.push(1.0);
    Ok(grid)
}

fn check_grid(t: f64, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidGrid("grid needs at least two points".into()));
    }
    if grid[0] != t {
        return Err(Error::InvalidGrid(format!(
            "grid starts at {} instead of t={t}",
            grid[0]
        )));
    }
    if *grid.last().unwrap() != 1.0 {
        return Err(Error::InvalidGrid("grid must end at 1".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidGrid(
            "grid times must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Precomputed exact transitions along a fixed grid. The coefficients do not
/// depend on the state, so many paths can share one plan.
#[derive(Debug, Clone)]
pub struct TransitionPlan {
    times: Vec<f64>,
    mean_factors: Vec<f64>,
    std_devs: Vec<f64>,
    gamma_final: f64,
}

impl TransitionPlan {
    pub fn new(params: &ModelParams, t: f64, grid: &[f64]) -> Result<Self> {
        check_grid(t, grid)?;
        let mut mean_factors = Vec::with_capacity(grid.len() - 1);
        let mut std_devs = Vec::with_capacity(grid.len() - 1);
        for w in grid.windows(2) {
            let (factor, variance) = transition_coefficients(params, w[0], w[1])?;
            mean_factors.push(factor);
            std_devs.push(variance.sqrt());
        }
        Ok(Self {
            times: grid.to_vec(),
            mean_factors,
            std_devs,
            gamma_final: params.gamma_final(),
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Number of transitions (grid points minus one).
    pub fn steps(&self) -> usize {
        self.mean_factors.len()
    }

    /// Largest one-step standard deviation on the grid.
    pub fn max_step_std(&self) -> f64 {
        self.std_devs.iter().copied().fold(0.0, f64::max)
    }

    /// Advances `x` across transition `i` using the standard normal `z`.
    #[inline]
    pub fn step(&self, i: usize, x: f64, z: f64) -> f64 {
        let sd = self.std_devs[i];
        let next = self.gamma_final + (x - self.gamma_final) * self.mean_factors[i];
        if sd == 0.0 {
            next
        } else {
            next + sd * z
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> PathGrid {
        let mut values = Vec::with_capacity(self.times.len());
        values.push(x);
        let mut current = x;
        for i in 0..self.steps() {
            let z: f64 = rng.sample(StandardNormal);
            current = self.step(i, current, z);
            values.push(current);
        }
        PathGrid {
            times: self.times.clone(),
            values,
        }
    }
}

/// Simulates `X` on `grid` (starting at `t`, ending at 1) by chaining exact
/// transitions. The final value is `γ(1)` exactly.
pub fn simulate_path<R: Rng + ?Sized>(
    params: &ModelParams,
    x: f64,
    t: f64,
    grid: &[f64],
    rng: &mut R,
) -> Result<PathGrid> {
    if !x.is_finite() {
        return Err(domain(format!("initial state must be finite, got {x}")));
    }
    Ok(TransitionPlan::new(params, t, grid)?.sample(x, rng))
}

/// Knobs for [`euler_path`]. `diffusion_scale = 0` gives the deterministic
/// drift-only limit.
#[derive(Debug, Clone, Copy)]
pub struct EulerOptions {
    pub diffusion_scale: f64,
}

impl Default for EulerOptions {
    fn default() -> Self {
        Self {
            diffusion_scale: 1.0,
        }
    }
}

/// Euler–Maruyama discretization of the SDE on a uniform grid from `t` to
/// `t_end ≤ 1 − 10⁻³`. Used only as an independent check of the exact sampler.
pub fn euler_path<R: Rng + ?Sized>(
    params: &ModelParams,
    x: f64,
    t: f64,
    n_steps: usize,
    t_end: f64,
    rng: &mut R,
    options: EulerOptions,
) -> Result<PathGrid> {
    if t_end > 1.0 - EULER_END_GUARD {
        return Err(domain(format!(
            "Euler sampler must stop by 1 - {EULER_END_GUARD}, got t_end={t_end}"
        )));
    }
    if !(t >= 0.0 && t < t_end) {
        return Err(Error::InvalidGrid(format!(
            "need 0 <= t < t_end, got t={t}, t_end={t_end}"
        )));
    }
    if n_steps == 0 {
        return Err(Error::InvalidGrid("need at least one step".into()));
    }
    let g1 = params.gamma_final();
    let drift_scale = 1.0 + params.theta();
    let dt = (t_end - t) / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut values = Vec::with_capacity(n_steps + 1);
    let mut s = t;
    let mut current = x;
    times.push(s);
    values.push(current);
    for i in 0..n_steps {
        let b = params.curve.b_value(s)?;
        let db = params.curve.b_derivative(s)?;
        let drift = drift_scale * (current - g1) * db / b;
        let diffusion = options.diffusion_scale * params.diffusion_coefficient(s)?;
        let z: f64 = if diffusion == 0.0 {
            0.0
        } else {
            rng.sample(StandardNormal)
        };
        current += drift * dt + diffusion * sqrt_dt * z;
        s = if i + 1 == n_steps {
            t_end
        } else {
            t + (i + 1) as f64 * dt
        };
        times.push(s);
        values.push(current);
    }
    Ok(PathGrid { times, values })
}

/// Writes `path_id,t,x` rows; path ids are positions in `paths`.
pub fn write_paths_csv<W: std::io::Write>(paths: &[PathGrid], out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    wtr.write_record(["path_id", "t", "x"])?;
    for (id, path) in paths.iter().enumerate() {
        for (t, x) in path.iter() {
            wtr.write_record([id.to_string(), real(t), real(x)])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
