//! Distribution spec strings: parsing, canonical form, sampling and mixing.

use fisher_scale::dist::Distribution;

fn main() -> fisher_scale::Result<()> {
    for spec in [
        "normal",
        "laplace*scale(2)",
        "cauchy+atom0(0.2)",
        "mix: 0.3*normal ++ 0.7*exponential*scale(0.5)",
        "uniform(-1,1)",
    ] {
        let d: Distribution = spec.parse()?;
        let xs = d.sample(5, 1);
        println!("{spec:<48} -> {d}\n    cdf(0.5) = {:.4}  sample = {:.3?}", d.cdf(0.5), xs);
    }
    let blend = Distribution::normal().mix(&Distribution::cauchy(), 0.25)?;
    println!("mix(normal, cauchy, 0.25) = {blend}");
    Ok(())
}
