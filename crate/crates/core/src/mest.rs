//! M-estimators of scale.
//!
//! A scale score `φ` is calibrated so that `∫ φ dF = 0` under a reference
//! distribution. The estimate `S_n` solves `Σ φ(xᵢ/S_n) = 0`, and its
//! asymptotic variance in the scale model is `σ² V₁(φ, F)` with
//! `V₁ = ∫ φ² dF / (∫ x φ′ dF)²`, bounded below by `1 / I_s1(F)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::quad::{self, QuadratureConfig};
use crate::score::{self, ScoreFunction};
use crate::varinfo::{Branch, Bump, TestFunction};

/// Raw (uncalibrated) score shapes.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreShape {
    /// `x²`.
    Chi2,
    /// `min(x², k²)`.
    Huber { k: f64 },
    /// The closed-form score `Λ` of a regular distribution.
    Lambda(ScoreFunction),
    /// A test function built from bumps.
    Bumps(TestFunction),
}

impl ScoreShape {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            ScoreShape::Chi2 => x * x,
            ScoreShape::Huber { k } => (x * x).min(k * k),
            ScoreShape::Lambda(s) => s.eval(x),
            ScoreShape::Bumps(t) => t.phi(x),
        }
    }

    pub fn x_derivative(&self, x: f64) -> f64 {
        match self {
            ScoreShape::Chi2 => 2.0 * x * x,
            ScoreShape::Huber { k } => {
                if x.abs() < *k {
                    2.0 * x * x
                } else {
                    0.0
                }
            }
            ScoreShape::Lambda(s) => s.x_derivative(x),
            ScoreShape::Bumps(t) => t.x_dphi(x),
        }
    }

    /// Polynomial growth order of `|φ|` and `|x φ′|` at infinity.
    pub fn growth(&self) -> f64 {
        match self {
            ScoreShape::Chi2 => 2.0,
            ScoreShape::Huber { .. } | ScoreShape::Bumps(_) => 0.0,
            ScoreShape::Lambda(s) => s
                .distribution()
                .terms()
                .iter()
                .filter(|t| t.is_continuous())
                .map(|t| match t.family {
                    crate::dist::Family::Normal => 2.0,
                    crate::dist::Family::Laplace | crate::dist::Family::Exponential => 1.0,
                    _ => 0.0,
                })
                .fold(0.0, f64::max),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            ScoreShape::Huber { k } => vec![-k, *k],
            ScoreShape::Bumps(t) => t.breakpoints(),
            _ => Vec::new(),
        }
    }

    /// Nondecreasing in `|x|` on each sign branch, which makes
    /// `s ↦ Σ φ(xᵢ/s)` nonincreasing.
    fn is_radially_monotone(&self) -> bool {
        match self {
            ScoreShape::Chi2 | ScoreShape::Huber { .. } => true,
            _ => {
                let grid: Vec<f64> = (0..=2400).map(|i| 10f64.powf(-6.0 + i as f64 * 0.005)).collect();
                [1.0, -1.0].iter().all(|&s| {
                    grid.windows(2).all(|w| {
                        let (a, b) = (self.eval(s * w[0]), self.eval(s * w[1]));
                        b >= a - 1e-12 * (1.0 + a.abs())
                    })
                })
            }
        }
    }
}

/// A calibrated scale score `φ = raw − β`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleScore {
    pub shape: ScoreShape,
    /// Calibration offset `β = ∫ raw dF` under the reference distribution.
    pub offset: f64,
    pub monotone: bool,
    pub label: String,
}

impl ScaleScore {
    /// Wraps a shape without recentering.
    pub fn uncalibrated(shape: ScoreShape, label: impl Into<String>) -> Self {
        let monotone = shape.is_radially_monotone();
        ScaleScore {
            shape,
            offset: 0.0,
            monotone,
            label: label.into(),
        }
    }

    /// The closed-form score of `d`; already centered since `∫ Λ dF₀ = 0` and `Λ(0) = 0`.
    pub fn lambda(d: &Distribution) -> Result<Self> {
        Ok(Self::uncalibrated(
            ScoreShape::Lambda(ScoreFunction::new(d)?),
            "lambda",
        ))
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.shape.eval(x) - self.offset
    }

    /// `x φ′(x)`.
    pub fn x_dphi(&self, x: f64) -> f64 {
        self.shape.x_derivative(x)
    }
}

/// Recenters `shape` so that `∫ φ dF = 0` under `d`.
pub fn calibrate(
    shape: ScoreShape,
    label: impl Into<String>,
    d: &Distribution,
    cfg: &QuadratureConfig,
) -> Result<ScaleScore> {
    if shape.growth() > 0.0 && shape.growth() >= d.tail_index() {
        return Err(Error::domain("∫ φ dF is infinite under the reference distribution"));
    }
    let breaks = shape.breakpoints();
    let beta = quad::expect_detailed(d, |x| shape.eval(x), true, &breaks, cfg)?.value;
    let mut s = ScaleScore::uncalibrated(shape, label);
    s.offset = beta;
    Ok(s)
}

/// Named scores: `lambda`, `chi2`, `huber(k)` and
/// `bumps[lin(c,w,a); log+(c,w,a); log-(c,w,a)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ScoreSpec {
    Lambda,
    Chi2,
    Huber(f64),
    Bumps(Vec<Bump>),
}

impl ScoreSpec {
    /// Builds the score and calibrates it under `reference`.
    pub fn build(&self, reference: &Distribution, cfg: &QuadratureConfig) -> Result<ScaleScore> {
        let label = self.to_string();
        match self {
            ScoreSpec::Lambda => {
                let mut s = ScaleScore::lambda(reference)?;
                s.label = label;
                Ok(s)
            }
            ScoreSpec::Chi2 => calibrate(ScoreShape::Chi2, label, reference, cfg),
            ScoreSpec::Huber(k) => calibrate(ScoreShape::Huber { k: *k }, label, reference, cfg),
            ScoreSpec::Bumps(b) => {
                calibrate(ScoreShape::Bumps(TestFunction::new(b.clone())), label, reference, cfg)
            }
        }
    }
}

impl fmt::Display for ScoreSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoreSpec::Lambda => f.write_str("lambda"),
            ScoreSpec::Chi2 => f.write_str("chi2"),
            ScoreSpec::Huber(k) => write!(f, "huber({k:?})"),
            ScoreSpec::Bumps(bs) => {
                f.write_str("bumps[")?;
                for (i, b) in bs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(";")?;
                    }
                    let tag = match b.kind {
                        crate::varinfo::BumpKind::Linear => "lin",
                        crate::varinfo::BumpKind::Log(Branch::Positive) => "log+",
                        crate::varinfo::BumpKind::Log(Branch::Negative) => "log-",
                    };
                    write!(f, "{tag}({:?},{:?},{:?})", b.center, b.half_width, b.coefficient)?;
                }
                f.write_str("]")
            }
        }
    }
}

impl FromStr for ScoreSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let lower = s.to_ascii_lowercase();
        if lower == "lambda" {
            return Ok(ScoreSpec::Lambda);
        }
        if lower == "chi2" {
            return Ok(ScoreSpec::Chi2);
        }
        if let Some(inner) = lower.strip_prefix("huber(").and_then(|r| r.strip_suffix(')')) {
            let k: f64 = inner
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad huber constant `{inner}`")))?;
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::Parse("huber constant must be positive".into()));
            }
            return Ok(ScoreSpec::Huber(k));
        }
        if let Some(inner) = lower.strip_prefix("bumps[").and_then(|r| r.strip_suffix(']')) {
            let bumps = inner
                .split(';')
                .filter(|p| !p.trim().is_empty())
                .map(parse_bump)
                .collect::<Result<Vec<_>>>()?;
            if bumps.is_empty() {
                return Err(Error::Parse("bumps[...] needs at least one bump".into()));
            }
            return Ok(ScoreSpec::Bumps(bumps));
        }
        Err(Error::Parse(format!("unknown score `{s}`")))
    }
}

fn parse_bump(s: &str) -> Result<Bump> {
    let s = s.trim();
    let open = s.find('(').ok_or_else(|| Error::Parse(format!("bad bump `{s}`")))?;
    let args = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::Parse(format!("bad bump `{s}`")))?;
    let nums = args
        .split(',')
        .map(|a| a.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{a}`"))))
        .collect::<Result<Vec<_>>>()?;
    let [c, w, a] = nums[..] else {
        return Err(Error::Parse(format!("bump `{s}` needs (center, half_width, coefficient)")));
    };
    if !(w > 0.0) {
        return Err(Error::Parse("bump half_width must be positive".into()));
    }
    let bump = match &s[..open] {
        "lin" => Bump::linear(c, w),
        "log+" => Bump::log(Branch::Positive, c, w),
        "log-" => Bump::log(Branch::Negative, c, w),
        other => return Err(Error::Parse(format!("unknown bump kind `{other}`"))),
    };
    Ok(bump.with_coefficient(a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MEstimate {
    pub scale: f64,
    /// Number of roots located; more than one only for non-monotone scores.
    pub roots: usize,
}

const BRACKET_FACTOR: f64 = 1e6;

/// Solves `Σ φ(xᵢ/S) = 0` for `S > 0`. Zero observations contribute the
/// constant `φ(0)`.
pub fn m_estimate(sample: &[f64], score: &ScaleScore) -> Result<MEstimate> {
    let nonzero = sample.iter().filter(|x| **x != 0.0).map(|x| x.abs());
    let (amin, amax) = nonzero.fold((f64::INFINITY, 0.0_f64), |(lo, hi), a| (lo.min(a), hi.max(a)));
    if amax == 0.0 {
        return Err(Error::ScaleUnidentified);
    }
    let n = sample.len() as f64;
    let tol = n * 1e-12;
    // work in t = ln s; the bracket is geometric
    let g = |t: f64| -> f64 {
        let s = t.exp();
        sample.iter().map(|&x| score.phi(x / s)).sum()
    };
    let mut lo = (amin / BRACKET_FACTOR).ln();
    let mut hi = (amax * BRACKET_FACTOR).ln();

    if score.monotone {
        let (mut glo, mut ghi) = (g(lo), g(hi));
        let mut expansions = 0;
        while glo * ghi > 0.0 && glo != 0.0 && expansions < 10 {
            lo -= 3.0 * std::f64::consts::LN_10;
            hi += 3.0 * std::f64::consts::LN_10;
            glo = g(lo);
            ghi = g(hi);
            expansions += 1;
        }
        if glo == 0.0 {
            return Ok(MEstimate { scale: lo.exp(), roots: 1 });
        }
        if ghi == 0.0 {
            return Ok(MEstimate { scale: hi.exp(), roots: 1 });
        }
        if glo * ghi > 0.0 {
            return Err(Error::NoRoot { lo: lo.exp(), hi: hi.exp() });
        }
        let t = brent(&g, lo, hi, glo, ghi, tol);
        return Ok(MEstimate { scale: t.exp(), roots: 1 });
    }

    // non-monotone: locate every sign change on a log grid, keep the root
    // closest to the root mean square
    let steps = 400;
    let grid: Vec<f64> = (0..=steps)
        .map(|i| lo + (hi - lo) * i as f64 / steps as f64)
        .collect();
    let vals: Vec<f64> = grid.iter().map(|&t| g(t)).collect();
    let mut roots = Vec::new();
    for i in 0..steps {
        let (a, b) = (vals[i], vals[i + 1]);
        if a == 0.0 {
            roots.push(grid[i]);
        } else if a * b < 0.0 {
            roots.push(brent(&g, grid[i], grid[i + 1], a, b, tol));
        }
    }
    if vals[steps] == 0.0 {
        roots.push(grid[steps]);
    }
    if roots.is_empty() {
        return Err(Error::NoRoot { lo: lo.exp(), hi: hi.exp() });
    }
    let rms = (sample.iter().map(|x| x * x).sum::<f64>() / n).sqrt().ln();
    let best = roots
        .iter()
        .copied()
        .min_by(|a, b| (a - rms).abs().total_cmp(&(b - rms).abs()))
        .unwrap();
    Ok(MEstimate {
        scale: best.exp(),
        roots: roots.len(),
    })
}

/// Brent's method on a sign-changing bracket.
fn brent(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, ftol: f64) -> f64 {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..300 {
        if fb.abs() <= ftol {
            return b;
        }
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let xtol = 2.0 * f64::EPSILON * b.abs().max(1.0);
        let m = 0.5 * (c - b);
        if m.abs() <= xtol {
            return b;
        }
        if e.abs() >= xtol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (xtol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > xtol { d } else { xtol.copysign(m) };
        fb = f(b);
    }
    b
}

/// `V₁(φ, F)`, with `0/0` kept apart from `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind", content = "value")]
pub enum AsymVariance {
    Finite(f64),
    Infinite,
    /// `∫ φ² dF = 0` and `∫ x φ′ dF = 0`.
    Degenerate,
}

impl AsymVariance {
    pub fn value(self) -> Option<f64> {
        match self {
            AsymVariance::Finite(v) => Some(v),
            _ => None,
        }
    }
}

const DEGENERATE_TOL: f64 = 1e-13;

pub fn asym_variance(score: &ScaleScore, d: &Distribution, cfg: &QuadratureConfig) -> Result<AsymVariance> {
    let growth = score.shape.growth();
    if growth > 0.0 && 2.0 * growth >= d.tail_index() {
        return Ok(AsymVariance::Infinite);
    }
    let breaks = score.shape.breakpoints();
    let num = quad::expect_detailed(
        d,
        |x| {
            let p = score.phi(x);
            p * p
        },
        true,
        &breaks,
        cfg,
    )?
    .value;
    let den = quad::expect_detailed(d, |x| score.x_dphi(x), true, &breaks, cfg)?.value;
    if den.abs() <= DEGENERATE_TOL {
        return Ok(if num <= DEGENERATE_TOL {
            AsymVariance::Degenerate
        } else {
            AsymVariance::Infinite
        });
    }
    Ok(AsymVariance::Finite(num / (den * den)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyTag {
    Regular,
    InfiniteVariance,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub value: f64,
    pub tag: EfficiencyTag,
}

/// `(I_s1(F) · V₁(φ, F))⁻¹`.
pub fn efficiency(score: &ScaleScore, d: &Distribution, cfg: &QuadratureConfig) -> Result<Efficiency> {
    let info = match score::fisher_closed(d, cfg)? {
        ExtendedReal::Infinite => return Err(Error::InformationInfinite),
        ExtendedReal::Finite(v) if v > 0.0 => v,
        ExtendedReal::Finite(_) => {
            return Err(Error::domain("efficiency needs positive information"))
        }
    };
    Ok(match asym_variance(score, d, cfg)? {
        AsymVariance::Finite(v) => Efficiency {
            value: 1.0 / (info * v),
            tag: EfficiencyTag::Regular,
        },
        AsymVariance::Infinite => Efficiency {
            value: 0.0,
            tag: EfficiencyTag::InfiniteVariance,
        },
        AsymVariance::Degenerate => Efficiency {
            value: 0.0,
            tag: EfficiencyTag::Degenerate,
        },
    })
}
