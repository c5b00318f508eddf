//! Closed-form scale score and Fisher information.
//!
//! For a continuous part with density `f`, the scale score is
//! `Λ(x) = −[x f(x)]′ / f(x) = −(1 + x f′(x)/f(x))` with `Λ(0) := 0`, and the
//! information is `∫ Λ² dF₀`. Atoms off zero, or densities for which `x f(x)`
//! jumps (uniform), make the information infinite. The log-derivatives are
//! analytic per family; mixtures combine them through posterior weights.

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::quad::{self, QuadratureConfig};

/// `Λ` of a regular distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreFunction {
    dist: Distribution,
}

impl ScoreFunction {
    pub fn new(d: &Distribution) -> Result<Self> {
        if !d.is_regular() {
            return Err(Error::InformationInfinite);
        }
        Ok(ScoreFunction { dist: d.clone() })
    }

    pub fn distribution(&self) -> &Distribution {
        &self.dist
    }

    /// `Λ(x)`; zero at the origin and off the support.
    pub fn eval(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match self.dist.log_ratios(x) {
            Some((r1, _)) => -(1.0 + r1),
            None => 0.0,
        }
    }

    /// `x Λ′(x)`.
    pub fn x_derivative(&self, x: f64) -> f64 {
        if x == 0.0 {
            return 0.0;
        }
        match self.dist.log_ratios(x) {
            Some((r1, r2)) => -(r1 + r2 - r1 * r1),
            None => 0.0,
        }
    }

    /// `Λ_σ(x) = σ⁻¹ Λ(x/σ)`, the derivative of `log f_σ(x)` in `σ`.
    pub fn eval_sigma(&self, sigma: f64, x: f64) -> f64 {
        self.eval(x / sigma) / sigma
    }
}

pub fn lambda(d: &Distribution, x: f64) -> Result<f64> {
    Ok(ScoreFunction::new(d)?.eval(x))
}

pub fn lambda_sigma(d: &Distribution, sigma: f64, x: f64) -> Result<f64> {
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(ScoreFunction::new(d)?.eval_sigma(sigma, x))
}

/// `I_s1(F) = ∫ Λ² dF₀`, or infinity when the density conditions fail.
pub fn fisher_closed(d: &Distribution, cfg: &QuadratureConfig) -> Result<ExtendedReal> {
    if !d.off_zero_atoms().is_empty()
        || d.continuous_terms().any(|t| !t.family.is_regular())
    {
        return Ok(ExtendedReal::Infinite);
    }
    if !d.has_continuous_part() {
        // only an atom at zero: every quotient is 0/0
        return Ok(ExtendedReal::Finite(0.0));
    }
    let score = ScoreFunction::new(d)?;
    let v = quad::expect_punctuated(
        d,
        |x| {
            let l = score.eval(x);
            l * l
        },
        cfg,
    )?;
    Ok(ExtendedReal::Finite(v))
}

/// `I_s(F_σ) = σ⁻² I_s1(F)` for the base distribution `d`.
pub fn fisher_scale(d: &Distribution, sigma: f64, cfg: &QuadratureConfig) -> Result<ExtendedReal> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    Ok(fisher_closed(d, cfg)?.scaled(sigma.powi(-2)))
}

/// `∫ Λ_σ² dF_{σ,0}` integrated directly on the scaled model; agrees with
/// [`fisher_scale`] in the finite case.
pub fn fisher_scale_by_score(
    d: &Distribution,
    sigma: f64,
    cfg: &QuadratureConfig,
) -> Result<ExtendedReal> {
    if !d.is_regular() {
        return fisher_scale(d, sigma, cfg);
    }
    let score = ScoreFunction::new(d)?;
    let scaled = d.scale(sigma)?;
    let v = quad::expect_punctuated(
        &scaled,
        |x| {
            let l = score.eval_sigma(sigma, x);
            l * l
        },
        cfg,
    )?;
    Ok(ExtendedReal::Finite(v))
}
