//! Hand-written densities and a composite Simpson rule under `x = tan u`,
//! kept independent of the library's density and quadrature code.

#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, PI};

pub type Pdf = fn(f64) -> f64;

pub fn normal(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}
pub fn laplace(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}
pub fn cauchy(x: f64) -> f64 {
    1.0 / (PI * (1.0 + x * x))
}
pub fn exponential(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp()
    } else {
        0.0
    }
}
pub fn blend(x: f64) -> f64 {
    0.7 * normal(x) + 0.3 * cauchy(x)
}

/// Composite Simpson of `∫ g(x) dx` over `(a, b) ⊂ ℝ` via `x = tan u`.
pub fn simpson_tan(g: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (ua, ub) = (a.atan(), b.atan());
    let h = (ub - ua) / panels as f64;
    // endpoints are nudged inward: heavy tails and support edges keep a
    // nonzero one-sided limit there
    let (lo, hi) = (ua.max(-FRAC_PI_2 + 1e-12) + 1e-12, ub.min(FRAC_PI_2 - 1e-12) - 1e-12);
    let f = |u: f64| {
        let u = u.clamp(lo, hi);
        let c = u.cos();
        g(u.tan()) / (c * c)
    };
    let mut s = f(ua) + f(ub);
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(ua + i as f64 * h);
    }
    s * h / 3.0
}

/// `Λ(x) = −(1 + x f′/f)` with `f′` by a central difference.
pub fn lambda_fd(pdf: Pdf, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let f = pdf(x);
    if f == 0.0 {
        return 0.0;
    }
    // the stencil stays on one side of zero, where densities may jump
    let h = (1e-5 * (1.0 + x.abs())).min(0.5 * x.abs());
    let df = (pdf(x + h) - pdf(x - h)) / (2.0 * h);
    -(1.0 + x * df / f)
}

/// `∫ Λ² dF₀` using the closed-form scores.
pub fn oracle_closed(pdf: Pdf, lambda: fn(f64) -> f64, a: f64, b: f64) -> f64 {
    simpson_tan(|x| lambda(x).powi(2) * pdf(x), a, b, 400_000)
}

pub const INF: f64 = f64::INFINITY;

/// `∫ Λ² dF₀` for a named regular family, with `Λ` from finite differences.
pub fn information(family: &str) -> f64 {
    let (pdf, a): (Pdf, f64) = match family {
        "normal" => (normal, -INF),
        "laplace" => (laplace, -INF),
        "cauchy" => (cauchy, -INF),
        "exponential" => (exponential, 0.0),
        other => panic!("no oracle for {other}"),
    };
    simpson_tan(|x| lambda_fd(pdf, x).powi(2) * pdf(x), a, INF, 400_000)
}
