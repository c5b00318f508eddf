//! The variational estimate over a bump basis, its maximizing test function,
//! and the comparison with the closed form.

use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;
use fisher_scale::score::{self, ScoreFunction};
use fisher_scale::varinfo::{self, BasisKind};

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    let d = Distribution::laplace();
    let basis = varinfo::build_basis(BasisKind::Mixed, 24, &d)?;
    let est = varinfo::fisher_variational(&d, &basis, varinfo::DEFAULT_REG_TOL, &cfg)?;
    let closed = score::fisher_closed(&d, &cfg)?;
    println!("variational {:.6} (rank {} of {}), closed form {closed}", est.value, est.rank_used, est.size);

    let phi = est.maximizer(&basis);
    let lambda = ScoreFunction::new(&d)?;
    println!("{:>6} {:>12} {:>12}", "x", "phi'(x) x", "x Lambda'(x)");
    for x in [-3.0, -1.5, -0.5, 0.5, 1.5, 3.0] {
        println!("{x:>6} {:>12.5} {:>12.5}", phi.x_dphi(x), lambda.x_derivative(x));
    }
    Ok(())
}
