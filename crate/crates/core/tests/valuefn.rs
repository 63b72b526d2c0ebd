use bridgestop::{beta_of_alpha, CurveSpec, ValueContext};

const ALPHAS: [f64; 6] = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0];

fn context(alpha: f64) -> ValueContext {
    let beta = beta_of_alpha(alpha).unwrap();
    ValueContext::new(alpha, CurveSpec::sqrt(beta, 0.0).unwrap()).unwrap()
}

#[test]
fn reduced_ode_residual() {
    let h = 1e-3;
    for alpha in ALPHAS {
        let ctx = context(alpha);
        let beta = ctx.beta();
        let f = |y: f64| ctx.f_reduced(y).unwrap();
        for i in 0..=599 {
            let y = -5.0 + i as f64 * 0.01;
            let d1 =
                (-f(y + 2.0 * h) + 8.0 * f(y + h) - 8.0 * f(y - h) + f(y - 2.0 * h)) / (12.0 * h);
            let d2 = (-f(y + 2.0 * h) + 16.0 * f(y + h) - 30.0 * f(y) + 16.0 * f(y - h)
                - f(y - 2.0 * h))
                / (12.0 * h * h);
            let residual = f(y) + alpha * alpha * y * d1 - d2 / (beta * beta);
            assert!(
                residual.abs() <= 1e-5 * (1.0 + f(y).abs()),
                "alpha={alpha} y={y}: {residual}"
            );
        }
    }
}

#[test]
fn boundary_rows() {
    for alpha in ALPHAS {
        let ctx = context(alpha);
        assert!((ctx.f_reduced(1.0).unwrap() - 1.0).abs() <= 1e-10);
        let h = 1e-6;
        let slope = (ctx.f_reduced(1.0).unwrap() - ctx.f_reduced(1.0 - h).unwrap()) / h;
        assert!((slope - 1.0).abs() <= 1e-4, "alpha={alpha}: {slope}");
        // The h₁ branch itself reaches 1 at y = 1 from below.
        assert!((ctx.f_reduced(1.0 - 1e-12).unwrap() - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn far_field_decay() {
    // f decays only like |y|^{−1/α²}; references from 30-digit quadrature.
    let reference = [
        (0.25, 1.3600386e-9),
        (0.5, 2.7478751e-5),
        (1.0, 0.013894556),
        (2.0, 0.19193472),
        (4.0, 0.50555343),
    ];
    for (alpha, expected) in reference {
        let f = context(alpha).f_reduced(-30.0).unwrap();
        assert!(
            (f - expected).abs() <= 1e-7 * expected,
            "alpha={alpha}: {f}"
        );
    }
    assert!(context(0.0).f_reduced(-30.0).unwrap() <= 1e-3);
    assert!(context(0.5).f_reduced(-30.0).unwrap() <= 1e-3);
}

#[test]
fn dominates_immediate_payoff() {
    for alpha in [0.0, 0.5, 1.0, 2.0, 4.0] {
        let ctx = context(alpha);
        for i in 0..=3100 {
            let y = -30.0 + i as f64 * 0.01;
            let f = ctx.f_reduced(y).unwrap();
            assert!(f >= y.max(0.0) - 1e-10, "alpha={alpha} y={y}: {f}");
        }
    }
}

#[test]
fn value_is_continuous_across_the_barrier() {
    let ctx = context(1.0);
    for t in [0.0, 0.3, 0.9, 0.999] {
        let g = ctx.curve().gamma(t).unwrap();
        let below = ctx.value(g - 1e-10, t).unwrap();
        assert!((below - g).abs() <= 1e-9, "t={t}");
        assert!(ctx.value(g - 0.3, t).unwrap() >= (g - 0.3f64).max(0.0));
    }
}

#[test]
fn far_field_value() {
    let ctx = ValueContext::new(0.5, CurveSpec::linear(1.0, 0.25).unwrap()).unwrap();
    assert!((ctx.value(-1e6, 0.5).unwrap() - 0.25).abs() <= 1e-9);
}

#[test]
fn bridge_value_at_origin() {
    let v = context(1.0).value(0.0, 0.0).unwrap();
    assert!((v - 0.3691364).abs() <= 1e-6, "{v}");
}
