//! Closed-form Fisher information of scale for the built-in families, and
//! how it moves under rescaling and an atom at zero.

use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;
use fisher_scale::score::{self, ScoreFunction};

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    for spec in ["normal", "laplace", "exponential", "cauchy", "uniform(0,2)"] {
        let d: Distribution = spec.parse()?;
        println!("{spec:>14}  I_s1 = {}", score::fisher_closed(&d, &cfg)?);
    }

    let normal = Distribution::normal();
    for sigma in [0.5, 1.0, 3.0] {
        println!("normal, sigma = {sigma}: I_s = {}", score::fisher_scale(&normal, sigma, &cfg)?);
    }

    let lambda = ScoreFunction::new(&normal)?;
    println!("normal score at x = 2: {}", lambda.eval(2.0));

    let punctured = normal.with_atom0(0.1)?;
    println!("{punctured}: {}", score::fisher_closed(&punctured, &cfg)?);
    Ok(())
}
