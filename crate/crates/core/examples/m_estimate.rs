//! M-estimates of scale with calibrated scores, their asymptotic variances
//! and efficiencies.

use fisher_scale::dist::Distribution;
use fisher_scale::mest::{self, ScoreSpec};
use fisher_scale::quad::QuadratureConfig;

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    let reference = Distribution::laplace();
    let sample = reference.scale(2.0)?.sample(500, 9);
    for spec in ["lambda", "chi2", "huber(1.5)"] {
        let score = spec.parse::<ScoreSpec>()?.build(&reference, &cfg)?;
        let est = mest::m_estimate(&sample, &score)?;
        let v1 = mest::asym_variance(&score, &reference, &cfg)?;
        let eff = mest::efficiency(&score, &reference, &cfg)?;
        println!(
            "{spec:<11} S = {:.4}  V1 = {:?}  efficiency = {:.4}",
            est.scale, v1, eff.value
        );
    }
    Ok(())
}
