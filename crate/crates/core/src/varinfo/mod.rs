//! Variational Fisher information of scale.
//!
//! Over the span of a basis `φ₁..φ_m` (plus constants), the quotient
//! `(∫ x φ′ dF)² / ∫ φ² dF` with `φ = Σ aᵢ φᵢ` becomes `(bᵀa)² / aᵀMa` where
//! `bᵢ = ∫ x φᵢ′ dF` and `M` is the covariance matrix of the `φᵢ` under `F`.
//! Its maximum is `bᵀM⁺b`. Directions with `Ma = 0` but `bᵀa ≠ 0` make the
//! quotient unbounded; they raise [`VariationalEstimate::divergence_flag`]
//! instead of producing a floating infinity.

mod basis;
mod scan;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::quad::{self, QuadratureConfig};

pub use basis::{
    build_basis, placement_levels, window_level, Basis, BasisKind, Branch, Bump, BumpKind,
    TestFunction, OVERLAP,
};
pub use scan::{convergence_scan, ConvergenceScan, ScanSettings, Verdict, DIVERGENCE_THRESHOLD};

/// Default relative eigenvalue cutoff of the pseudo-inverse.
pub const DEFAULT_REG_TOL: f64 = 1e-12;

/// A null direction is flagged when its share of `‖b‖` exceeds this.
const NULL_DIRECTION_TOL: f64 = 1e-6;

/// Absolute eigenvalue floor, in units of `sup|φᵢ|²`.
const ABS_EIGEN_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "source")]
pub enum MomentSource {
    Quadrature,
    /// Plug-in moments of an empirical measure. Its information is infinite
    /// whenever mass sits off zero; the `m ≤ n/2` cap acts as smoothing.
    Empirical { n: usize },
}

/// `b` and the centered second-moment matrix `M` of a basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub b: DVector<f64>,
    pub m: DMatrix<f64>,
    /// `∫ φᵢ dF`.
    pub mean: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationalEstimate {
    /// `bᵀM⁺b`.
    pub value: f64,
    pub size: usize,
    pub kind: BasisKind,
    pub rank_used: usize,
    /// `λ_max / λ_min` over the retained eigenvalues.
    pub condition: f64,
    pub divergence_flag: bool,
    pub b: Vec<f64>,
    /// Eigenvalues of `M`, descending.
    pub eigenvalues: Vec<f64>,
    /// Maximizing coefficients `M⁺b`.
    pub coefficients: Vec<f64>,
    #[serde(flatten)]
    pub source: MomentSource,
    #[serde(skip)]
    pub moment_matrix: Vec<f64>,
}

impl VariationalEstimate {
    /// The maximizing test function within the span.
    pub fn maximizer(&self, basis: &Basis) -> TestFunction {
        basis.combine(&self.coefficients)
    }

    pub fn moment_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.size, self.size, &self.moment_matrix)
    }
}

/// Quadrature moments of `basis` under `d`. Every entry shares one panel
/// decomposition and summation order.
pub fn moments(basis: &Basis, d: &Distribution, cfg: &QuadratureConfig) -> Result<Moments> {
    let m = basis.size();
    let tri = m * (m + 1) / 2;
    let els = &basis.elements;
    let raw = quad::expect_many(
        d,
        2 * m + tri,
        |x, out| {
            for (i, e) in els.iter().enumerate() {
                out[i] = e.x_dphi(x);
                out[m + i] = e.phi(x);
            }
            let (head, prod) = out.split_at_mut(2 * m);
            let phi = &head[m..];
            let mut k = 0;
            for i in 0..m {
                for j in i..m {
                    prod[k] = phi[i] * phi[j];
                    k += 1;
                }
            }
        },
        true,
        &basis.breakpoints(),
        cfg,
    )?;
    Ok(assemble(m, &raw))
}

fn assemble(m: usize, raw: &[f64]) -> Moments {
    let b = DVector::from_column_slice(&raw[..m]);
    let mean = DVector::from_column_slice(&raw[m..2 * m]);
    let mut mat = DMatrix::zeros(m, m);
    let mut k = 2 * m;
    for i in 0..m {
        for j in i..m {
            let v = raw[k] - mean[i] * mean[j];
            mat[(i, j)] = v;
            mat[(j, i)] = v;
            k += 1;
        }
    }
    Moments { b, m: mat, mean }
}

/// Empirical moments of `basis` under the sample's empirical measure.
pub fn empirical_moments(sample: &[f64], basis: &Basis) -> Moments {
    let m = basis.size();
    let tri = m * (m + 1) / 2;
    let mut acc = vec![0.0; 2 * m + tri];
    let mut phi = vec![0.0; m];
    for &x in sample {
        for (i, e) in basis.elements.iter().enumerate() {
            acc[i] += e.x_dphi(x);
            phi[i] = e.phi(x);
            acc[m + i] += phi[i];
        }
        let mut k = 2 * m;
        for i in 0..m {
            for j in i..m {
                acc[k] += phi[i] * phi[j];
                k += 1;
            }
        }
    }
    let n = sample.len() as f64;
    acc.iter_mut().for_each(|v| *v /= n);
    assemble(m, &acc)
}

/// Maximizes the quotient over the span of `basis` under `d`.
pub fn fisher_variational(
    d: &Distribution,
    basis: &Basis,
    reg_tol: f64,
    cfg: &QuadratureConfig,
) -> Result<VariationalEstimate> {
    check_reg_tol(reg_tol)?;
    let mom = moments(basis, d, cfg)?;
    Ok(solve(&mom, basis, reg_tol, MomentSource::Quadrature))
}

/// Plug-in estimate from a sample; requires `n ≥ 2m`.
pub fn fisher_empirical(sample: &[f64], basis: &Basis, reg_tol: f64) -> Result<VariationalEstimate> {
    check_reg_tol(reg_tol)?;
    let (n, m) = (sample.len(), basis.size());
    if n < 2 * m {
        return Err(Error::BasisTooRich { n, m });
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("sample contains non-finite values"));
    }
    let mom = empirical_moments(sample, basis);
    Ok(solve(&mom, basis, reg_tol, MomentSource::Empirical { n }))
}

fn check_reg_tol(reg_tol: f64) -> Result<()> {
    if !(reg_tol > 0.0 && reg_tol < 1.0) {
        return Err(Error::domain(format!("reg_tol must lie in (0, 1), got {reg_tol}")));
    }
    Ok(())
}

/// `bᵀM⁺b` with the eigenvalue cutoff `reg_tol·λ_max`.
pub fn solve(mom: &Moments, basis: &Basis, reg_tol: f64, source: MomentSource) -> VariationalEstimate {
    let m = mom.b.len();
    let eig = SymmetricEigen::new(mom.m.clone());
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let lambda_max = eig.eigenvalues[order[0]].max(0.0);
    let unit = basis.scale().powi(2);
    let cutoff = (reg_tol * lambda_max).max(ABS_EIGEN_FLOOR * unit);
    let b_norm = mom.b.norm();

    let mut value = 0.0;
    let mut coef = DVector::zeros(m);
    let mut rank = 0;
    let mut lambda_min_kept = f64::INFINITY;
    let mut flag = false;
    for &k in &order {
        let lam = eig.eigenvalues[k];
        let v = eig.eigenvectors.column(k);
        let proj = v.dot(&mom.b);
        if lam > cutoff {
            value += proj * proj / lam;
            coef += v * (proj / lam);
            rank += 1;
            lambda_min_kept = lambda_min_kept.min(lam);
        } else if proj.abs() > NULL_DIRECTION_TOL * b_norm && b_norm > 0.0 {
            flag = true;
        }
    }
    let condition = if rank > 0 { lambda_max / lambda_min_kept } else { f64::INFINITY };
    VariationalEstimate {
        value,
        size: m,
        kind: basis.kind,
        rank_used: rank,
        condition,
        divergence_flag: flag,
        b: mom.b.iter().copied().collect(),
        eigenvalues: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        coefficients: coef.iter().copied().collect(),
        source,
        moment_matrix: mom.m.transpose().iter().copied().collect(),
    }
}
