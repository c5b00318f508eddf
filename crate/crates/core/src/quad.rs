//! Atom-aware integration against a distribution and its punctuated measure.
//!
//! Each continuous component is integrated over its own quantile window
//! `[q(tail_prob), q(1 − tail_prob)]`, pre-split at a ladder of quantiles so
//! that heavy tails get geometrically growing panels. Light-tailed components
//! get the window doubled about the median, which pushes the truncation error
//! of polynomial moments far below `abs_tol`. Panels are refined by global
//! adaptive bisection with a 7/15-point Gauss–Kronrod pair; each panel is
//! also checked against its two halves.
//!
//! Atoms are added as point evaluations; the punctuated variants drop the atom
//! at zero.

use serde::{Deserialize, Serialize};

use crate::dist::{Distribution, Family, Term};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Probability mass truncated in each tail of each component.
    pub tail_prob: f64,
    /// Bisections allowed beyond the initial panels.
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            tail_prob: 1e-12,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::domain("quadrature tolerances must be positive"));
        }
        if !(self.tail_prob > 0.0 && self.tail_prob < 1e-6) {
            return Err(Error::domain("tail_prob must lie in (0, 1e-6)"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::domain("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

/// An integral with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Quadrature error estimate plus the truncated tail bound.
    pub abs_err: f64,
}

/// `∫ g dF = Σ atoms + ∫ g f dλ`.
pub fn expect(d: &Distribution, g: impl Fn(f64) -> f64, cfg: &QuadratureConfig) -> Result<f64> {
    Ok(expect_detailed(d, g, true, &[], cfg)?.value)
}

/// `∫ g dF₀`, the atom at zero removed.
pub fn expect_punctuated(
    d: &Distribution,
    g: impl Fn(f64) -> f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    Ok(expect_detailed(d, g, false, &[], cfg)?.value)
}

/// Scalar expectation with extra panel breakpoints (kinks of `g`) and the
/// error bound.
pub fn expect_detailed(
    d: &Distribution,
    g: impl Fn(f64) -> f64,
    include_atom0: bool,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Integral> {
    let mut tail_bound = 0.0;
    let mut value = 0.0;
    let mut err = 0.0;
    for t in d.continuous_terms() {
        let (lo, hi) = window(t, cfg.tail_prob);
        let panels = panel_breaks(t, lo, hi, breaks, cfg.tail_prob);
        let w = t.weight;
        let r = integrate_vec(
            |x, out: &mut [f64]| out[0] = g(x) * w * t.pdf(x),
            1,
            &panels,
            cfg,
        )?;
        value += r.values[0];
        err += r.abs_err;
        if !t.family.is_light_tailed() && !matches!(t.family, Family::Uniform { .. }) {
            tail_bound += cfg.tail_prob * w * (g(lo).abs() + g(hi).abs());
        }
    }
    value += atom_sum(d, include_atom0, &g);
    Ok(Integral {
        value,
        abs_err: err + tail_bound,
    })
}

/// Vector-valued expectation: `g(x, out)` fills `dim` integrands at `x`.
/// All entries share the same panel decomposition and summation order, so the
/// result does not depend on how entries are later grouped.
pub fn expect_many(
    d: &Distribution,
    dim: usize,
    g: impl Fn(f64, &mut [f64]),
    include_atom0: bool,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<Vec<f64>> {
    let mut total = vec![0.0; dim];
    for t in d.continuous_terms() {
        let (lo, hi) = window(t, cfg.tail_prob);
        let panels = panel_breaks(t, lo, hi, breaks, cfg.tail_prob);
        let w = t.weight;
        let r = integrate_vec(
            |x, out: &mut [f64]| {
                g(x, out);
                let dens = w * t.pdf(x);
                out.iter_mut().for_each(|v| *v *= dens);
            },
            dim,
            &panels,
            cfg,
        )?;
        total.iter_mut().zip(&r.values).for_each(|(a, b)| *a += b);
    }
    let mut buf = vec![0.0; dim];
    for (pos, mass) in d.atoms() {
        if pos == 0.0 && !include_atom0 {
            continue;
        }
        g(pos, &mut buf);
        total.iter_mut().zip(&buf).for_each(|(a, b)| *a += mass * b);
    }
    Ok(total)
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: &QuadratureConfig) -> Result<Integral> {
    let r = integrate_vec(|x, out: &mut [f64]| out[0] = f(x), 1, &[a, b], cfg)?;
    Ok(Integral {
        value: r.values[0],
        abs_err: r.abs_err,
    })
}

fn atom_sum(d: &Distribution, include_atom0: bool, g: impl Fn(f64) -> f64) -> f64 {
    d.atoms()
        .into_iter()
        .filter(|&(pos, _)| include_atom0 || pos != 0.0)
        .map(|(pos, mass)| mass * g(pos))
        .sum()
}

/// Integration window of one continuous component.
pub(crate) fn window(t: &Term, tail_prob: f64) -> (f64, f64) {
    match t.family {
        Family::Uniform { a, b } => (a * t.scale, b * t.scale),
        Family::Exponential => {
            let hi = t.quantile(1.0 - tail_prob);
            let med = t.quantile(0.5);
            (0.0, hi + (hi - med))
        }
        fam => {
            let lo = t.quantile(tail_prob);
            let hi = t.quantile(1.0 - tail_prob);
            if fam.is_light_tailed() {
                let med = t.quantile(0.5);
                (lo - (med - lo), hi + (hi - med))
            } else {
                (lo, hi)
            }
        }
    }
}

const LADDER: [f64; 10] = [1e-10, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.05, 0.15, 0.3, 0.5];

fn panel_breaks(t: &Term, lo: f64, hi: f64, extra: &[f64], tail_prob: f64) -> Vec<f64> {
    let mut pts = vec![lo, hi, 0.0];
    if !matches!(t.family, Family::Uniform { .. }) {
        for &p in LADDER.iter().filter(|&&p| p > tail_prob) {
            pts.push(t.quantile(p));
            pts.push(t.quantile(1.0 - p));
        }
        pts.push(t.quantile(tail_prob));
        pts.push(t.quantile(1.0 - tail_prob));
    } else {
        for k in 1..4 {
            pts.push(lo + (hi - lo) * k as f64 / 4.0);
        }
    }
    pts.extend_from_slice(extra);
    pts.retain(|x| x.is_finite() && *x >= lo && *x <= hi);
    pts.sort_by(f64::total_cmp);
    let span = (hi - lo).abs().max(f64::MIN_POSITIVE);
    pts.dedup_by(|b, a| (*b - *a).abs() <= 1e-14 * span.min(1.0).max(a.abs() * 1e-2));
    pts
}

struct VecIntegral {
    values: Vec<f64>,
    abs_err: f64,
}

/// A panel is evaluated as its two halves. Its error is the larger of the
/// halves' own Gauss–Kronrod estimates and the disagreement between the
/// whole-panel rule and the halves, which exposes kinks the embedded Gauss
/// rule does not see.
struct Panel {
    a: f64,
    b: f64,
    /// Kronrod values of the left and right halves.
    left: Vec<f64>,
    right: Vec<f64>,
    val: Vec<f64>,
    err: f64,
}

impl Panel {
    fn new(f: &impl Fn(f64, &mut [f64]), a: f64, b: f64, whole: Option<Vec<f64>>, dim: usize, buf: &mut [f64]) -> Self {
        let whole = whole.unwrap_or_else(|| gauss_kronrod(f, a, b, dim, buf).0);
        let mid = 0.5 * (a + b);
        let (left, el) = gauss_kronrod(f, a, mid, dim, buf);
        let (right, er) = gauss_kronrod(f, mid, b, dim, buf);
        let mut err: f64 = 0.0;
        let val: Vec<f64> = (0..dim)
            .map(|i| {
                let v = left[i] + right[i];
                err = err.max((whole[i] - v).abs()).max(el[i] + er[i]);
                v
            })
            .collect();
        Panel { a, b, left, right, val, err }
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Kronrod values and per-entry `|K − G|`.
fn gauss_kronrod(f: &impl Fn(f64, &mut [f64]), a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    f(c, buf);
    for i in 0..dim {
        k[i] = WGK[7] * buf[i];
        g[i] = WG[3] * buf[i];
    }
    for j in 0..7 {
        let dx = h * XGK[j];
        for x in [c - dx, c + dx] {
            f(x, buf);
            for i in 0..dim {
                k[i] += WGK[j] * buf[i];
                if j % 2 == 1 {
                    g[i] += WG[j / 2] * buf[i];
                }
            }
        }
    }
    for i in 0..dim {
        k[i] *= h;
        g[i] = (k[i] - g[i] * h).abs();
    }
    (k, g)
}

/// Refinement stops at this fraction of the requested tolerance, so that
/// separately computed integrals stay consistent to well below `rel_tol`.
const TOL_MARGIN: f64 = 0.05;

fn integrate_vec(
    f: impl Fn(f64, &mut [f64]),
    dim: usize,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<VecIntegral> {
    let mut buf = vec![0.0; dim];
    let mut panels: Vec<Panel> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| Panel::new(&f, w[0], w[1], None, dim, &mut buf))
        .collect();
    let mut splits = 0;
    loop {
        let mut totals = vec![0.0; dim];
        let mut err = 0.0;
        for p in &panels {
            totals.iter_mut().zip(&p.val).for_each(|(t, v)| *t += v);
            err += p.err;
        }
        let scale = totals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let tol = cfg.abs_tol.max(cfg.rel_tol * scale);
        if err <= TOL_MARGIN * tol || panels.is_empty() {
            // final sum in positional order so the result is independent of refinement history
            panels.sort_by(|p, q| p.a.total_cmp(&q.a));
            let mut values = vec![0.0; dim];
            for p in &panels {
                values.iter_mut().zip(&p.val).for_each(|(t, v)| *t += v);
            }
            return Ok(VecIntegral { values, abs_err: err });
        }
        if splits >= cfg.max_subdivisions {
            return Err(Error::Quadrature {
                estimate: totals[0],
                error_bound: err,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|(i, p), (j, q)| p.err.total_cmp(&q.err).then(j.cmp(i)))
            .map(|(i, _)| i)
            .unwrap();
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(Error::Quadrature {
                estimate: totals[0],
                error_bound: err,
            });
        }
        panels.push(Panel::new(&f, p.a, mid, Some(p.left), dim, &mut buf));
        panels.push(Panel::new(&f, mid, p.b, Some(p.right), dim, &mut buf));
        splits += 1;
    }
}
