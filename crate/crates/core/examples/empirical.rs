//! Plug-in information from a sample, against the quadrature value on the
//! same basis.

use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;
use fisher_scale::varinfo::{self, BasisKind};

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    let d = Distribution::normal();
    let basis = varinfo::build_basis(BasisKind::Linear, 8, &d)?;
    let exact = varinfo::fisher_variational(&d, &basis, varinfo::DEFAULT_REG_TOL, &cfg)?;
    println!("quadrature moments: {:.5}", exact.value);
    for n in [100, 1_000, 10_000, 100_000] {
        let sample = d.sample(n, 42);
        let est = varinfo::fisher_empirical(&sample, &basis, varinfo::DEFAULT_REG_TOL)?;
        println!("n = {n:>6}: {:.5}", est.value);
    }
    Ok(())
}
