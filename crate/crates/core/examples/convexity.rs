//! On a fixed basis the variational estimate is convex in the distribution.

use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;
use fisher_scale::varinfo::{self, BasisKind};

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    let a = Distribution::normal();
    let b = Distribution::laplace().scale(2.0)?;
    let basis = varinfo::build_basis(BasisKind::Mixed, 12, &a.mix(&b, 0.5)?)?;
    let value = |d: &Distribution| varinfo::fisher_variational(d, &basis, 1e-12, &cfg).map(|e| e.value);
    let (va, vb) = (value(&a)?, value(&b)?);
    for s in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let mixed = value(&a.mix(&b, s)?)?;
        let chord = (1.0 - s) * va + s * vb;
        println!("s = {s:.2}: value {mixed:.5} <= chord {chord:.5}");
    }
    Ok(())
}
