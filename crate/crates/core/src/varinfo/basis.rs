//! Raised-cosine test functions and quantile-placed bases.
//!
//! A test function is described by its derivative, a finite sum of bumps
//! `ψ(y; c, w) = ½(1 + cos(π(y − c)/w))` on `|y − c| ≤ w`. Linear bumps use
//! `y = x`; log bumps use `y = log|x|` on one sign branch with the factor
//! `1/|x|`, so that `x φ′(x)` is itself a bump in `log|x|`. The function `φ`
//! is the antiderivative with `φ(−∞) = 0`; it is bounded and constant outside
//! a compact set, and `φ′` is continuous with compact support.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpKind {
    Linear,
    Log(Branch),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub kind: BumpKind,
    pub center: f64,
    pub half_width: f64,
    pub coefficient: f64,
}

/// `ψ` on the normalized coordinate `z = (y − c)/w`.
#[inline]
fn psi(z: f64) -> f64 {
    if z.abs() <= 1.0 {
        0.5 * (1.0 + (PI * z).cos())
    } else {
        0.0
    }
}

/// `∫_{−∞}^{y} ψ`, in units of `w`.
#[inline]
fn psi_integral(z: f64) -> f64 {
    if z <= -1.0 {
        0.0
    } else if z >= 1.0 {
        1.0
    } else {
        0.5 * ((z + 1.0) + (PI * z).sin() / PI)
    }
}

impl Bump {
    pub fn linear(center: f64, half_width: f64) -> Self {
        Bump {
            kind: BumpKind::Linear,
            center,
            half_width,
            coefficient: 1.0,
        }
    }

    pub fn log(branch: Branch, center: f64, half_width: f64) -> Self {
        Bump {
            kind: BumpKind::Log(branch),
            center,
            half_width,
            coefficient: 1.0,
        }
    }

    pub fn with_coefficient(self, coefficient: f64) -> Self {
        Bump { coefficient, ..self }
    }

    fn z(&self, y: f64) -> f64 {
        (y - self.center) / self.half_width
    }

    pub fn phi(&self, x: f64) -> f64 {
        let w = self.half_width;
        let a = self.coefficient;
        match self.kind {
            BumpKind::Linear => a * w * psi_integral(self.z(x)),
            BumpKind::Log(Branch::Positive) => {
                if x > 0.0 {
                    a * w * psi_integral(self.z(x.ln()))
                } else {
                    0.0
                }
            }
            BumpKind::Log(Branch::Negative) => {
                if x < 0.0 {
                    a * w * (1.0 - psi_integral(self.z((-x).ln())))
                } else {
                    a * w
                }
            }
        }
    }

    pub fn dphi(&self, x: f64) -> f64 {
        match self.kind {
            BumpKind::Linear => self.coefficient * psi(self.z(x)),
            BumpKind::Log(branch) => {
                if on_branch(branch, x) {
                    self.coefficient * psi(self.z(x.abs().ln())) / x.abs()
                } else {
                    0.0
                }
            }
        }
    }

    /// `x φ′(x)`.
    pub fn x_dphi(&self, x: f64) -> f64 {
        match self.kind {
            BumpKind::Linear => self.coefficient * x * psi(self.z(x)),
            BumpKind::Log(branch) => {
                if on_branch(branch, x) {
                    let s = if x > 0.0 { 1.0 } else { -1.0 };
                    s * self.coefficient * psi(self.z(x.abs().ln()))
                } else {
                    0.0
                }
            }
        }
    }

    /// Support of `φ′` in `x`.
    pub fn support(&self) -> (f64, f64) {
        let (c, w) = (self.center, self.half_width);
        match self.kind {
            BumpKind::Linear => (c - w, c + w),
            BumpKind::Log(Branch::Positive) => ((c - w).exp(), (c + w).exp()),
            BumpKind::Log(Branch::Negative) => (-(c + w).exp(), -(c - w).exp()),
        }
    }

    /// `sup |φ|`.
    pub fn bound(&self) -> f64 {
        self.coefficient.abs() * self.half_width
    }

    /// The bump of `x ↦ φ(x/σ)`, the counterpart of `φ` under `F ↦ F_σ`.
    pub fn transport(&self, sigma: f64) -> Self {
        match self.kind {
            BumpKind::Linear => Bump {
                center: self.center * sigma,
                half_width: self.half_width * sigma,
                coefficient: self.coefficient / sigma,
                ..*self
            },
            BumpKind::Log(_) => Bump {
                center: self.center + sigma.ln(),
                ..*self
            },
        }
    }
}

fn on_branch(branch: Branch, x: f64) -> bool {
    match branch {
        Branch::Positive => x > 0.0,
        Branch::Negative => x < 0.0,
    }
}

/// An element of the test class: `φ′` is a finite sum of bumps.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TestFunction {
    pub bumps: Vec<Bump>,
}

impl TestFunction {
    pub fn new(bumps: Vec<Bump>) -> Self {
        TestFunction { bumps }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.phi(x)).sum()
    }

    pub fn dphi(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.dphi(x)).sum()
    }

    pub fn x_dphi(&self, x: f64) -> f64 {
        self.bumps.iter().map(|b| b.x_dphi(x)).sum()
    }

    pub fn bound(&self) -> f64 {
        self.bumps.iter().map(Bump::bound).sum()
    }

    /// Kinks of `φ′`, useful as quadrature breakpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.bumps
            .iter()
            .flat_map(|b| {
                let (lo, hi) = b.support();
                [lo, hi]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Linear,
    Log,
    Mixed,
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "lin" => Ok(BasisKind::Linear),
            "log" => Ok(BasisKind::Log),
            "mixed" => Ok(BasisKind::Mixed),
            other => Err(Error::Parse(format!("unknown basis kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisKind::Linear => "linear",
            BasisKind::Log => "log",
            BasisKind::Mixed => "mixed",
        })
    }
}

/// Unit-coefficient single bumps spanning a finite-dimensional test space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Basis {
    pub elements: Vec<Bump>,
    pub kind: BasisKind,
}

/// Overlap factor: half-width over local center spacing.
pub const OVERLAP: f64 = 1.25;

impl Basis {
    pub fn new(kind: BasisKind, elements: Vec<Bump>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::domain("a basis needs at least one element"));
        }
        for b in &elements {
            if !(b.half_width > 0.0 && b.half_width.is_finite() && b.center.is_finite()) {
                return Err(Error::domain(format!("invalid bump {b:?}")));
            }
        }
        let mut uniq: Vec<Bump> = Vec::with_capacity(elements.len());
        for b in elements {
            if !uniq.contains(&b) {
                uniq.push(b);
            }
        }
        Ok(Basis {
            elements: uniq,
            kind,
        })
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    /// Smallest interval containing every bump support.
    pub fn window(&self) -> (f64, f64) {
        self.elements.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), b| {
            let (a, c) = b.support();
            (lo.min(a), hi.max(c))
        })
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        self.elements
            .iter()
            .flat_map(|b| {
                let (lo, hi) = b.support();
                [lo, hi]
            })
            .collect()
    }

    /// Largest `sup|φ_i|`, the natural unit of the moment matrix.
    pub fn scale(&self) -> f64 {
        self.elements.iter().map(Bump::bound).fold(0.0, f64::max)
    }

    /// `Σ aᵢ φᵢ`.
    pub fn combine(&self, coefficients: &[f64]) -> TestFunction {
        TestFunction::new(
            self.elements
                .iter()
                .zip(coefficients)
                .map(|(b, &a)| b.with_coefficient(b.coefficient * a))
                .collect(),
        )
    }

    /// Every element replaced by `x ↦ φ(x/σ)`.
    pub fn transport(&self, sigma: f64) -> Self {
        Basis {
            elements: self.elements.iter().map(|b| b.transport(sigma)).collect(),
            kind: self.kind,
        }
    }

    /// Adds linear bumps centered at `points`.
    pub fn refined_at(&self, points: &[f64], half_width: f64) -> Result<Self> {
        let mut elements = self.elements.clone();
        elements.extend(points.iter().map(|&p| Bump::linear(p, half_width)));
        Basis::new(self.kind, elements)
    }
}

/// Tail level of the placement window for `m` bumps.
pub fn window_level(m: usize) -> f64 {
    let k = (m + 1) as f64;
    0.5 / (k * k)
}

/// Quantile levels equally spaced on the logit scale over
/// `[p, 1 − p]`, `p = window_level(m)`; a single bump sits at the median.
pub fn placement_levels(m: usize) -> Vec<f64> {
    if m == 1 {
        return vec![0.5];
    }
    let p = window_level(m);
    let lo = (p / (1.0 - p)).ln();
    let step = -2.0 * lo / (m - 1) as f64;
    (0..m)
        .map(|k| {
            let t = lo + step * k as f64;
            1.0 / (1.0 + (-t).exp())
        })
        .collect()
}

fn half_widths(centers: &[f64], single: f64) -> Vec<f64> {
    if centers.len() == 1 {
        return vec![OVERLAP * single];
    }
    let gaps: Vec<f64> = centers.windows(2).map(|w| w[1] - w[0]).collect();
    (0..centers.len())
        .map(|i| {
            let left = if i > 0 { gaps[i - 1] } else { gaps[0] };
            let right = if i < gaps.len() { gaps[i] } else { gaps[gaps.len() - 1] };
            OVERLAP * left.max(right)
        })
        .collect()
}

/// `m` bumps placed at quantiles of the continuous part of `d`.
pub fn build_basis(kind: BasisKind, m: usize, d: &Distribution) -> Result<Basis> {
    if m == 0 {
        return Err(Error::domain("basis size must be at least 1"));
    }
    if !d.has_continuous_part() {
        return Err(Error::NoContinuousSupport);
    }
    let elements = match kind {
        BasisKind::Linear => linear_bumps(m, d)?,
        BasisKind::Log => log_bumps(m, d)?,
        BasisKind::Mixed => {
            let n_log = m / 2;
            let mut v = linear_bumps(m - n_log, d)?;
            if n_log > 0 {
                v.extend(log_bumps(n_log, d)?);
            }
            v
        }
    };
    Basis::new(kind, elements)
}

fn linear_bumps(m: usize, d: &Distribution) -> Result<Vec<Bump>> {
    let centers = placement_levels(m)
        .into_iter()
        .map(|u| d.continuous_quantile(u))
        .collect::<Result<Vec<_>>>()?;
    let p = window_level(m);
    let single = 0.5 * (d.continuous_quantile(1.0 - p)? - d.continuous_quantile(p)?);
    Ok(centers
        .iter()
        .zip(half_widths(&centers, single))
        .map(|(&c, w)| Bump::linear(c, w))
        .collect())
}

fn log_bumps(m: usize, d: &Distribution) -> Result<Vec<Bump>> {
    let f0 = d.continuous_cdf(0.0)?;
    let neg_mass = f0;
    let pos_mass = 1.0 - f0;
    let (n_pos, n_neg) = split_count(m, pos_mass, neg_mass);
    let mut out = Vec::with_capacity(m);
    for (branch, k) in [(Branch::Negative, n_neg), (Branch::Positive, n_pos)] {
        if k == 0 {
            continue;
        }
        // quantile of |X| conditional on the branch
        let abs_q = |u: f64| -> Result<f64> {
            Ok(match branch {
                Branch::Positive => d.continuous_quantile(f0 + u * (1.0 - f0))?,
                Branch::Negative => -d.continuous_quantile(f0 * (1.0 - u))?,
            })
        };
        let mut centers = placement_levels(k)
            .into_iter()
            .map(|u| abs_q(u).map(f64::ln))
            .collect::<Result<Vec<_>>>()?;
        centers.sort_by(f64::total_cmp);
        let p = window_level(k);
        let single = 0.5 * (abs_q(1.0 - p)?.ln() - abs_q(p)?.ln());
        out.extend(
            centers
                .iter()
                .zip(half_widths(&centers, single))
                .map(|(&c, w)| Bump::log(branch, c, w)),
        );
    }
    Ok(out)
}

/// Splits `m` bumps across the sign branches in proportion to their mass.
fn split_count(m: usize, pos: f64, neg: f64) -> (usize, usize) {
    const EMPTY: f64 = 1e-12;
    match (pos > EMPTY, neg > EMPTY) {
        (true, false) => (m, 0),
        (false, true) => (0, m),
        _ if m == 1 => {
            if pos >= neg {
                (1, 0)
            } else {
                (0, 1)
            }
        }
        _ => {
            let n_pos = ((m as f64) * pos / (pos + neg)).round() as usize;
            let n_pos = n_pos.clamp(1, m - 1);
            (n_pos, m - n_pos)
        }
    }
}
