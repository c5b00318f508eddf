//! The L2 remainder of the root density shrinks linearly in the step.

use fisher_scale::asymp::l2_remainder;
use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    for spec in ["normal", "laplace", "cauchy", "exponential", "mix: 0.7*normal ++ 0.3*cauchy"] {
        let d: Distribution = spec.parse()?;
        let r = [0.04, 0.02, 0.01]
            .map(|t| l2_remainder(&d, 1.0, t, &cfg))
            .into_iter()
            .collect::<fisher_scale::Result<Vec<_>>>()?;
        let shown: Vec<String> = r.iter().map(|v| format!("{v:.3e}")).collect();
        println!("{spec:<30} r = [{}]  r(0.01)/r(0.02) = {:.4}", shown.join(", "), r[2] / r[1]);
    }
    Ok(())
}
