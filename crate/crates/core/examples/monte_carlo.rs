//! Monte Carlo variance of an M-estimator against its asymptotic value, and
//! the information bound table.

use fisher_scale::asymp::{self, McConfig};
use fisher_scale::dist::Distribution;
use fisher_scale::mest::ScoreSpec;
use fisher_scale::quad::QuadratureConfig;

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    let d = Distribution::normal();
    let score = ScoreSpec::Lambda.build(&d, &cfg)?;
    let mc = McConfig { n: 1000, reps: 1000, seed: 17, workers: 0 };
    for sigma in [1.0, 3.0] {
        let r = asymp::mc_variance(&d, &score, sigma, &mc, &cfg)?;
        let c = r.check("variance").expect("variance check");
        println!("sigma = {sigma}: var = {:.4}, target = {:.4}, pass = {}", c.observed, c.target, c.pass);
    }

    let scores = ["lambda", "huber(1.5)", "huber(0.5)", "chi2"]
        .iter()
        .map(|s| s.parse::<ScoreSpec>()?.build(&d, &cfg))
        .collect::<fisher_scale::Result<Vec<_>>>()?;
    let table = asymp::bound_report(&d, &scores, &cfg)?;
    println!("1/I = {:.4}", 1.0 / table.information);
    for row in &table.rows {
        println!("{:<11} V1 = {:?}  efficiency = {:.4}", row.id, row.v1, row.efficiency.value);
    }
    Ok(())
}
