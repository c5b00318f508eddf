//! Refinement scans: finite or divergent information.

use serde::{Deserialize, Serialize};

use super::{build_basis, fisher_variational, Basis, BasisKind, VariationalEstimate};
use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quad::QuadratureConfig;

/// Values above this are reported as divergent. Every representable
/// distribution with finite information has `I_s1 ≤ 2`.
pub const DIVERGENCE_THRESHOLD: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSettings {
    pub reg_tol: f64,
    /// Relative change between the last two values accepted as convergence.
    pub settle_tol: f64,
    /// Growth factor over the last refinement treated as divergence.
    pub growth_factor: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            reg_tol: super::DEFAULT_REG_TOL,
            settle_tol: 0.005,
            growth_factor: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "verdict")]
pub enum Verdict {
    Finite { value: f64 },
    Divergent,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceScan {
    pub sizes: Vec<usize>,
    pub estimates: Vec<VariationalEstimate>,
    pub verdict: Verdict,
}

/// Basis of size `m` for `d`, refined at every atom off zero with bumps whose
/// half-width shrinks like `1/m`. Pure-atom distributions borrow the
/// placement of the standard normal.
pub fn scan_basis(d: &Distribution, kind: BasisKind, m: usize) -> Result<Basis> {
    let base = if d.has_continuous_part() {
        build_basis(kind, m, d)?
    } else {
        build_basis(kind, m, &Distribution::normal())?
    };
    let atoms: Vec<f64> = d.off_zero_atoms().into_iter().map(|(p, _)| p).collect();
    if atoms.is_empty() {
        return Ok(base);
    }
    let min_hw = base
        .elements
        .iter()
        .map(|b| b.half_width)
        .fold(f64::INFINITY, f64::min);
    let closest = atoms.iter().fold(f64::INFINITY, |a, p| a.min(p.abs()));
    let hw = min_hw.min(0.5 * closest) / m as f64;
    base.refined_at(&atoms, hw)
}

pub fn convergence_scan(
    d: &Distribution,
    kind: BasisKind,
    sizes: &[usize],
    settings: &ScanSettings,
    cfg: &QuadratureConfig,
) -> Result<ConvergenceScan> {
    if sizes.is_empty() {
        return Err(Error::domain("convergence scan needs at least one size"));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) || sizes[0] == 0 {
        return Err(Error::domain("scan sizes must be positive and strictly increasing"));
    }
    let estimates = sizes
        .iter()
        .map(|&m| {
            let basis = scan_basis(d, kind, m)?;
            fisher_variational(d, &basis, settings.reg_tol, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let verdict = judge(&estimates, settings);
    Ok(ConvergenceScan {
        sizes: sizes.to_vec(),
        estimates,
        verdict,
    })
}

fn judge(estimates: &[VariationalEstimate], settings: &ScanSettings) -> Verdict {
    if estimates.iter().any(|e| e.divergence_flag) {
        return Verdict::Divergent;
    }
    let last = estimates[estimates.len() - 1].value;
    if last > DIVERGENCE_THRESHOLD {
        return Verdict::Divergent;
    }
    let [.., prev, cur] = estimates else {
        return Verdict::Undecided;
    };
    let (prev, cur) = (prev.value, cur.value);
    if prev > 0.0 && cur > settings.growth_factor * prev {
        return Verdict::Divergent;
    }
    if (cur - prev).abs() <= settings.settle_tol * cur.abs() || (cur == 0.0 && prev == 0.0) {
        return Verdict::Finite { value: cur };
    }
    Verdict::Undecided
}
