//! Refinement scans separating finite from infinite information.

use fisher_scale::dist::Distribution;
use fisher_scale::quad::QuadratureConfig;
use fisher_scale::varinfo::{convergence_scan, BasisKind, ScanSettings};

fn main() -> fisher_scale::Result<()> {
    let cfg = QuadratureConfig::default();
    let settings = ScanSettings::default();
    let sizes = [4, 8, 16, 32];
    let cases = [
        ("normal", BasisKind::Linear),
        ("cauchy", BasisKind::Log),
        ("uniform(0,2)", BasisKind::Linear),
        ("mix: 0.5*normal ++ 0.5*dirac(1)", BasisKind::Linear),
        ("dirac(0)", BasisKind::Mixed),
    ];
    for (spec, kind) in cases {
        let d: Distribution = spec.parse()?;
        let scan = convergence_scan(&d, kind, &sizes, &settings, &cfg)?;
        let values: Vec<String> = scan.estimates.iter().map(|e| format!("{:.5}", e.value)).collect();
        println!("{spec:<34} {kind:<7} [{}] -> {:?}", values.join(", "), scan.verdict);
    }
    Ok(())
}
