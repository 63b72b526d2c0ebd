use std::io::Write;

use bridgestop::freeboundary::{beta_sweep, write_sweep_csv};
use bridgestop::mc::{optimality_scan, verify_value, OptimalityScan, ValueCheck};
use bridgestop::process::{mean_var, path_rng, simulate_path, uniform_grid, write_paths_csv};
use bridgestop::{beta_of_alpha, BoundarySolution, McConfig, ModelParams, PathGrid, ValueContext};
use serde::Serialize;

use crate::args::{BetaArgs, Format, PathsArgs, ValueArgs, VerifyArgs};
use crate::config::ResolvedCurve;
use crate::error::Result;
use crate::svg::{padded, Frame, Svg, HEIGHT, PALETTE, WIDTH};

/// Dominance tolerance in paired standard errors.
pub const DOMINANCE_SIGMAS: f64 = 3.0;

/// Output bytes plus whether every check the command runs passed.
pub struct Rendered {
    pub bytes: Vec<u8>,
    pub passed: bool,
}

#[derive(Serialize)]
struct Envelope<'a, A: Serialize, R: Serialize, D: Serialize> {
    config: Tagged<'a, A>,
    results: R,
    diagnostics: D,
}

#[derive(Serialize)]
struct Tagged<'a, A: Serialize> {
    command: &'static str,
    #[serde(flatten)]
    args: &'a A,
}

fn json<A: Serialize, R: Serialize, D: Serialize>(
    command: &'static str,
    args: &A,
    results: R,
    diagnostics: D,
) -> Result<Vec<u8>> {
    let envelope = Envelope {
        config: Tagged { command, args },
        results,
        diagnostics,
    };
    let mut bytes = serde_json::to_vec_pretty(&envelope)?;
    bytes.push(b'\n');
    Ok(bytes)
}

// ---------------------------------------------------------------- beta

#[derive(Serialize)]
struct BetaDiagnostics {
    points: usize,
    max_abs_residual: f64,
}

pub fn beta(args: &BetaArgs) -> Result<Rendered> {
    let alphas = args.alphas()?;
    let rows = beta_sweep(&alphas)?;
    let bytes = match args.output.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_sweep_csv(&rows, &mut buf)?;
            buf
        }
        Format::Json => {
            let diagnostics = BetaDiagnostics {
                points: rows.len(),
                max_abs_residual: rows.iter().map(|r| r.residual.abs()).fold(0.0, f64::max),
            };
            json("beta", args, &rows, diagnostics)?
        }
        Format::Svg => beta_svg(&rows)?.into_bytes(),
    };
    Ok(Rendered {
        bytes,
        passed: true,
    })
}

fn beta_svg(rows: &[BoundarySolution]) -> Result<String> {
    let beta_one = beta_of_alpha(1.0)?;
    let lo = rows.iter().map(|r| r.alpha).fold(0.0, f64::min);
    let hi = rows.iter().map(|r| r.alpha).fold(1.0, f64::max);
    let b_min = rows.iter().map(|r| r.beta).fold(beta_one, f64::min);
    let frame = Frame {
        left: 80.0,
        top: 50.0,
        width: WIDTH - 120.0,
        height: HEIGHT - 120.0,
        x_range: (lo, hi),
        y_range: padded(b_min, 1.0),
    };
    let mut svg = Svg::new();
    svg.text((WIDTH / 2.0, 28.0), "middle", 16.0, "Barrier constant β(α)");
    frame.axes(&mut svg, "α", "β", true);
    svg.polyline(
        &frame.map_all(rows.iter().map(|r| (r.alpha, r.beta))),
        PALETTE[0],
        2.0,
        None,
    );
    for (point, label) in [
        ((0.0, 1.0), "β(0) = 1".to_string()),
        ((1.0, beta_one), format!("β(1) ≈ {beta_one:.6}")),
    ] {
        let (px, py) = frame.map(point);
        svg.circle((px, py), 4.0, "#d62728");
        svg.text((px + 8.0, py - 8.0), "start", 12.0, &label);
    }
    Ok(svg.finish())
}

// --------------------------------------------------------------- value

#[derive(Serialize)]
struct ValueResult {
    alpha: f64,
    beta: f64,
    x: f64,
    t: f64,
    value: f64,
    region: &'static str,
    barrier: f64,
}

#[derive(Serialize)]
struct ValueDiagnostics {
    curve: ResolvedCurve,
    /// `(x − γ(1))/b(t)`; absent at `t = 1`.
    y: Option<f64>,
    normalization: f64,
}

pub fn value(args: &ValueArgs) -> Result<Rendered> {
    let curve = args.validate()?;
    let ctx = ValueContext::new(args.alpha, curve.spec.clone())?;
    let v = ctx.value(args.x, args.t)?;
    let region = if ctx.stop_region(args.x, args.t)? {
        "stop"
    } else {
        "continue"
    };
    let b = curve.spec.b_value(args.t)?;
    let result = ValueResult {
        alpha: args.alpha,
        beta: ctx.beta(),
        x: args.x,
        t: args.t,
        value: v,
        region,
        barrier: curve.spec.gamma(args.t)?,
    };
    let bytes = match args.output.format {
        Format::Json => {
            let diagnostics = ValueDiagnostics {
                y: (b > 0.0).then(|| (args.x - curve.gamma_final) / b),
                normalization: ctx.normalization(),
                curve,
            };
            json("value", args, result, diagnostics)?
        }
        _ => format!(
            "alpha,beta,x,t,value,region\n{:?},{:?},{:?},{:?},{:?},{}\n",
            result.alpha, result.beta, result.x, result.t, result.value, result.region
        )
        .into_bytes(),
    };
    Ok(Rendered {
        bytes,
        passed: true,
    })
}

// --------------------------------------------------------------- paths

#[derive(Serialize)]
struct Panel {
    alpha: f64,
    beta: f64,
    curve: ResolvedCurve,
    times: Vec<f64>,
    paths: Vec<Vec<f64>>,
    mean: Vec<f64>,
    std: Vec<f64>,
    barrier: Vec<f64>,
}

#[derive(Serialize)]
struct PathsDiagnostics {
    /// Every path ends exactly at γ(1).
    pinned: bool,
}

fn simulate_panel(args: &PathsArgs, curve: ResolvedCurve) -> Result<Panel> {
    let params = ModelParams::optimal(curve.alpha, curve.spec.clone())?;
    let grid = uniform_grid(args.t, args.steps)?;
    let paths: Vec<PathGrid> = (0..args.paths)
        .map(|i| {
            simulate_path(
                &params,
                args.x,
                args.t,
                &grid,
                &mut path_rng(args.seed, i as u64),
            )
        })
        .collect::<bridgestop::Result<_>>()?;
    let moments: Vec<(f64, f64)> = grid
        .iter()
        .map(|&s| mean_var(&params, args.x, args.t, s))
        .collect::<bridgestop::Result<_>>()?;
    let barrier = grid
        .iter()
        .map(|&s| curve.spec.gamma(s))
        .collect::<bridgestop::Result<_>>()?;
    Ok(Panel {
        alpha: curve.alpha,
        beta: params.beta(),
        curve,
        paths: paths.into_iter().map(|p| p.values).collect(),
        mean: moments.iter().map(|m| m.0).collect(),
        std: moments.iter().map(|m| m.1.sqrt()).collect(),
        barrier,
        times: grid,
    })
}

pub fn paths(args: &PathsArgs) -> Result<Rendered> {
    let curves = args.validate()?;
    let panels: Vec<Panel> = curves
        .into_iter()
        .map(|c| simulate_panel(args, c))
        .collect::<Result<_>>()?;
    let pinned = panels.iter().all(|p| {
        p.paths
            .iter()
            .all(|v| v.last() == Some(&p.curve.gamma_final))
    });
    let bytes = match args.output.format {
        Format::Csv => paths_csv(&panels)?,
        Format::Json => json("paths", args, &panels, PathsDiagnostics { pinned })?,
        Format::Svg => paths_svg(&panels).into_bytes(),
    };
    Ok(Rendered {
        bytes,
        passed: pinned,
    })
}

/// `path_id,t,x` for one α; with several, a leading `alpha` column.
fn paths_csv(panels: &[Panel]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    if let [panel] = panels {
        let grids: Vec<PathGrid> = panel
            .paths
            .iter()
            .map(|v| PathGrid {
                times: panel.times.clone(),
                values: v.clone(),
            })
            .collect();
        write_paths_csv(&grids, &mut buf)?;
        return Ok(buf);
    }
    writeln!(buf, "alpha,path_id,t,x")?;
    for panel in panels {
        for (id, values) in panel.paths.iter().enumerate() {
            for (t, x) in panel.times.iter().zip(values) {
                writeln!(buf, "{:?},{id},{t:?},{x:?}", panel.alpha)?;
            }
        }
    }
    Ok(buf)
}

fn paths_svg(panels: &[Panel]) -> String {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for p in panels {
        let band = p.mean.iter().zip(&p.std).flat_map(|(m, s)| [m - s, m + s]);
        for v in p
            .paths
            .iter()
            .flatten()
            .copied()
            .chain(band)
            .chain(p.barrier.iter().copied())
        {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let y_range = padded(lo, hi);
    let (left, right, gap) = (70.0, 20.0, 20.0);
    let n = panels.len() as f64;
    let width = (WIDTH - left - right - gap * (n - 1.0)) / n;

    let mut svg = Svg::new();
    svg.text(
        (WIDTH / 2.0, 24.0),
        "middle",
        16.0,
        "Simulated paths, ±1 std band and barrier γ(t)",
    );
    for (k, p) in panels.iter().enumerate() {
        let frame = Frame {
            left: left + k as f64 * (width + gap),
            top: 60.0,
            width,
            height: HEIGHT - 120.0,
            x_range: (p.times[0], 1.0),
            y_range,
        };
        let upper = p
            .times
            .iter()
            .zip(p.mean.iter().zip(&p.std))
            .map(|(&t, (m, s))| (t, m + s));
        let lower = p
            .times
            .iter()
            .zip(p.mean.iter().zip(&p.std))
            .rev()
            .map(|(&t, (m, s))| (t, m - s));
        svg.polygon(&frame.map_all(upper.chain(lower)), "#7f7f7f", 0.25);
        svg.polyline(
            &frame.map_all(p.times.iter().copied().zip(p.mean.iter().copied())),
            "#7f7f7f",
            1.0,
            Some("4 3"),
        );
        svg.polyline(
            &frame.map_all(p.times.iter().copied().zip(p.barrier.iter().copied())),
            "#d62728",
            1.5,
            None,
        );
        for (i, values) in p.paths.iter().enumerate() {
            let pts = frame.map_all(p.times.iter().copied().zip(values.iter().copied()));
            svg.polyline(&pts, PALETTE[i % PALETTE.len()], 1.0, None);
        }
        frame.axes(&mut svg, "s", "X", k == 0);
        svg.text(
            (frame.left + width / 2.0, 50.0),
            "middle",
            13.0,
            &format!("α = {:.2}", p.alpha),
        );
    }
    svg.finish()
}

// -------------------------------------------------------------- verify

#[derive(Serialize)]
struct VerifyResults {
    scan: OptimalityScan,
    value_check: ValueCheck,
}

#[derive(Serialize)]
struct VerifyDiagnostics {
    curve: ResolvedCurve,
    /// Scales whose estimate beats `c = 1` by more than three paired SEs.
    dominance_violations: Vec<f64>,
    value_flagged: bool,
    passed: bool,
}

pub fn verify(args: &VerifyArgs) -> Result<Rendered> {
    let curve = args.validate()?;
    let params = ModelParams::optimal(args.alpha, curve.spec.clone())?;
    let config = McConfig {
        n_paths: args.paths,
        n_steps: args.steps,
        seed: args.seed,
    };
    let scan = optimality_scan(&params, args.x, args.t, &args.scales, config)?;
    let check = verify_value(&params, args.x, args.t, config)?;
    let violations: Vec<f64> = scan
        .dominance_violations(DOMINANCE_SIGMAS)
        .iter()
        .map(|r| r.scale)
        .collect();
    let passed = violations.is_empty() && !check.flagged;
    eprintln!(
        "verify: value {:.6} vs MC {:.6} ± {:.6} (z = {:.2}, margin {:.4}); dominance violations: {}; {}",
        check.analytic,
        check.mc.mean,
        check.mc.std_error,
        check.z_score,
        check.bias_margin,
        violations.len(),
        if passed { "PASS" } else { "FAIL" }
    );
    let bytes = match args.output.format {
        Format::Json => {
            let diagnostics = VerifyDiagnostics {
                curve,
                dominance_violations: violations,
                value_flagged: check.flagged,
                passed,
            };
            json(
                "verify",
                args,
                VerifyResults {
                    scan,
                    value_check: check,
                },
                diagnostics,
            )?
        }
        _ => {
            let mut buf = Vec::new();
            scan.write_csv(&mut buf)?;
            buf
        }
    };
    Ok(Rendered { bytes, passed })
}
