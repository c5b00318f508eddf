//! Independent oracles: hand-written densities, composite Simpson quadrature
//! under x = tan(u), and central finite differences in the scale parameter.
//! Nothing here calls the library's density or quadrature code.

mod common;

use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;
use fisher_scale::score::{self, ScoreFunction};

use common::*;


#[test]
fn oracle_matches_reference_constants() {
    // the oracle itself reproduces the textbook values
    let n = oracle_closed(normal, |x| x * x - 1.0, -INF, INF);
    let l = oracle_closed(laplace, |x| x.abs() - 1.0, -INF, INF);
    let c = oracle_closed(cauchy, |x| (x * x - 1.0) / (x * x + 1.0), -INF, INF);
    let e = oracle_closed(exponential, |x| x - 1.0, 0.0, INF);
    assert!((n - 2.0).abs() < 1e-10, "{n}");
    assert!((l - 1.0).abs() < 1e-10, "{l}");
    assert!((c - 0.5).abs() < 1e-10, "{c}");
    assert!((e - 1.0).abs() < 1e-10, "{e}");
}

#[test]
fn closed_route_matches_oracle() {
    let cfg = QuadratureConfig::default();
    let cases: [(&str, Pdf, f64, f64); 4] = [
        ("normal", normal, -INF, INF),
        ("laplace", laplace, -INF, INF),
        ("cauchy", cauchy, -INF, INF),
        ("exponential", exponential, 0.0, INF),
    ];
    for (spec, pdf, a, b) in cases {
        let d: Distribution = spec.parse().unwrap();
        let lib = score::fisher_closed(&d, &cfg).unwrap().value().unwrap();
        let oracle = simpson_tan(|x| lambda_fd(pdf, x).powi(2) * pdf(x), a, b, 400_000);
        let tol = if spec == "cauchy" { 1e-6 } else { 1e-8 };
        assert!((lib - oracle).abs() < tol, "{spec}: {lib} vs {oracle}");
    }
}

#[test]
fn mixture_score_matches_finite_differences() {
    let cfg = QuadratureConfig::default();
    let d: Distribution = "mix: 0.7*normal ++ 0.3*cauchy".parse().unwrap();
    let s = ScoreFunction::new(&d).unwrap();
    for x in [-30.0, -4.0, -1.1, -0.2, 0.3, 1.0, 2.5, 9.0, 100.0] {
        assert!((s.eval(x) - lambda_fd(blend, x)).abs() < 1e-7, "x = {x}");
    }
    let lib = score::fisher_closed(&d, &cfg).unwrap().value().unwrap();
    let oracle = simpson_tan(|x| lambda_fd(blend, x).powi(2) * blend(x), -INF, INF, 400_000);
    assert!((lib - oracle).abs() < 1e-7, "{lib} vs {oracle}");
}

#[test]
fn lambda_sigma_is_the_scale_derivative_of_log_density() {
    let families: [(&str, Pdf); 4] = [
        ("normal", normal),
        ("laplace", laplace),
        ("cauchy", cauchy),
        ("exponential", exponential),
    ];
    for (spec, pdf) in families {
        let d: Distribution = spec.parse().unwrap();
        for sigma in [0.5, 1.0, 3.0] {
            for x in [-2.0, -0.3, 0.7, 1.9, 5.0] {
                if pdf(x) == 0.0 {
                    continue;
                }
                let logf = |s: f64| (pdf(x / s) / s).ln();
                let h = 1e-5 * sigma;
                let fd = (logf(sigma + h) - logf(sigma - h)) / (2.0 * h);
                let lib = score::lambda_sigma(&d, sigma, x).unwrap();
                assert!((lib - fd).abs() < 1e-6, "{spec} sigma={sigma} x={x}: {lib} vs {fd}");
            }
        }
    }
}

#[test]
fn x_derivative_of_score_matches_finite_differences() {
    for spec in ["normal", "cauchy", "mix: 0.5*laplace ++ 0.5*normal*scale(2)"] {
        let d: Distribution = spec.parse().unwrap();
        let s = ScoreFunction::new(&d).unwrap();
        for x in [-3.0f64, -0.8, 0.4, 1.7, 6.0] {
            let h = 1e-6 * (1.0 + x.abs());
            let fd = x * (s.eval(x + h) - s.eval(x - h)) / (2.0 * h);
            assert!((s.x_derivative(x) - fd).abs() < 1e-5, "{spec} x={x}");
        }
    }
}

#[test]
fn atom_at_zero_scales_oracle_value() {
    let cfg = QuadratureConfig::default();
    let oracle = simpson_tan(|x| lambda_fd(laplace, x).powi(2) * laplace(x), -INF, INF, 400_000);
    for eps in [0.1, 0.5] {
        let d = Distribution::laplace().with_atom0(eps).unwrap();
        let lib = score::fisher_closed(&d, &cfg).unwrap().value().unwrap();
        assert!((lib - (1.0 - eps) * oracle).abs() < 1e-8);
    }
}
