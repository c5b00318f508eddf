//! Simulated log-likelihood ratios against their LAN limit.

use fisher_scale::asymp::{self, McConfig};
use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    let mc = McConfig { n: 2000, reps: 500, seed: 7, workers: 0 };
    for spec in ["normal", "cauchy", "exponential"] {
        let d: Distribution = spec.parse()?;
        let trend = asymp::lan_trend(&d, 1.0, 1.0, &mc, 2, &cfg)?;
        let first = &trend.runs[0];
        let l = first.statistic("L").expect("L statistic");
        println!(
            "{spec:<12} mean L = {:.3} (target {:.3}), var L = {:.3}, mean|L-T| over n: {:.4?}",
            l.mean,
            first.checks[0].target,
            l.variance,
            trend.mean_abs_remainder
        );
    }
    Ok(())
}
