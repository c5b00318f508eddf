//! Numerical checks of the asymptotic theory: the L2 remainder of the root
//! density, the LAN expansion of the log-likelihood ratio, Monte Carlo
//! variances of M-estimates and the information bound.
//!
//! Replicates run on a rayon pool. Each replicate draws from its own
//! generator seeded with `seed ^ splitmix64(index)`, and per-replicate
//! statistics are combined in replicate order by pairwise summation, so a
//! report is bit-identical for every worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::extended::ExtendedReal;
use crate::mest::{self, AsymVariance, Efficiency, ScaleScore};
use crate::quad::{self, QuadratureConfig};
use crate::score::{self, ScoreFunction};

/// Seed of replicate `index` under master seed `seed`.
pub fn replicate_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Pairwise summation in slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// Mean, variance and their standard errors of one replicated quantity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statistic {
    pub name: String,
    pub mean: f64,
    pub variance: f64,
    /// `sd / √reps`.
    pub se_mean: f64,
    /// Standard error of the sample variance from the fourth central moment.
    pub se_variance: f64,
}

impl Statistic {
    pub fn from_values(name: impl Into<String>, xs: &[f64]) -> Self {
        let k = xs.len() as f64;
        let mean = pairwise_sum(xs) / k;
        let dev2: Vec<f64> = xs.iter().map(|x| (x - mean).powi(2)).collect();
        let dev4: Vec<f64> = dev2.iter().map(|d| d * d).collect();
        let variance = pairwise_sum(&dev2) / (k - 1.0);
        let m2 = pairwise_sum(&dev2) / k;
        let m4 = pairwise_sum(&dev4) / k;
        Statistic {
            name: name.into(),
            mean,
            variance,
            se_mean: (variance / k).sqrt(),
            se_variance: ((m4 - m2 * m2).max(0.0) / k).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `|observed − target| ≤ tolerance`.
    Within,
    /// `observed < target`.
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub rule: Rule,
    pub observed: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn within(name: impl Into<String>, observed: f64, target: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            rule: Rule::Within,
            observed,
            target,
            tolerance,
            pass: (observed - target).abs() <= tolerance,
        }
    }

    pub fn below(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Check {
            name: name.into(),
            rule: Rule::Below,
            observed,
            target: bound,
            tolerance: 0.0,
            pass: observed < bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub kind: String,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub statistics: Vec<Statistic>,
    pub checks: Vec<Check>,
    /// Replicates that produced no value.
    pub failures: usize,
    pub pass: bool,
}

impl McReport {
    pub fn statistic(&self, name: &str) -> Option<&Statistic> {
        self.statistics.iter().find(|s| s.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Simulation settings shared by the replicated runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// Worker threads; `0` uses the rayon default.
    pub workers: usize,
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("sample size n must be positive"));
        }
        if self.reps < 2 {
            return Err(Error::domain("at least two replicates are needed"));
        }
        Ok(())
    }
}

/// Runs `f(index, rng)` for every replicate, returning results in index order.
fn replicate<T: Send>(
    mc: &McConfig,
    f: impl Fn(&mut ChaCha8Rng) -> T + Sync,
) -> Result<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.workers)
        .build()
        .map_err(|e| Error::domain(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        (0..mc.reps)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(replicate_seed(mc.seed, i as u64));
                f(&mut rng)
            })
            .collect()
    }))
}

fn require_regular(d: &Distribution) -> Result<ScoreFunction> {
    ScoreFunction::new(d)
}

/// `‖√f_{σ+t} − √f_σ (1 + ½ t Λ_σ)‖_{L₂} / |t|` over the continuous part.
/// The atom at zero does not move with `σ` and contributes nothing.
pub fn l2_remainder(d: &Distribution, sigma: f64, t: f64, cfg: &QuadratureConfig) -> Result<f64> {
    let score = require_regular(d)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain("sigma must be positive"));
    }
    if t == 0.0 || !t.is_finite() || sigma + t <= 0.0 {
        return Err(Error::domain("t must be nonzero with sigma + t > 0"));
    }
    let here = d.scale(sigma)?;
    let moved = d.scale(sigma + t)?;
    // (√(f_{σ+t}/f_σ) − 1 − ½tΛ_σ)/t, integrated against f_σ dλ
    let g = |x: f64| -> f64 {
        let (Ok(a), Ok(b)) = (moved.ln_density(x), here.ln_density(x)) else {
            return 0.0;
        };
        if b == f64::NEG_INFINITY {
            return 0.0;
        }
        let root = (0.5 * (a - b)).exp_m1();
        let r = (root - 0.5 * t * score.eval_sigma(sigma, x)) / t;
        r * r
    };
    let v = quad::expect_detailed(&here, g, false, &[], cfg)?.value;
    Ok(v.max(0.0).sqrt())
}

/// One LAN run: per replicate, the log-likelihood ratio `L` of
/// `σ + h/√n` against `σ` and its linearization
/// `T = h n^{-1/2} Σ Λ_σ(xᵢ) − ½ h² I_s(F_σ)`.
///
/// Checks: mean of `L` within three standard errors of `−½h²I_s`, variance of
/// `L` within 15% of `h²I_s`, and `|mean + ½ var|` within four combined
/// standard errors.
pub fn lan_sample(
    d: &Distribution,
    sigma: f64,
    h: f64,
    mc: &McConfig,
    cfg: &QuadratureConfig,
) -> Result<McReport> {
    mc.validate()?;
    let score = require_regular(d)?;
    if !(sigma > 0.0 && sigma.is_finite()) || !h.is_finite() {
        return Err(Error::domain("sigma must be positive and h finite"));
    }
    let n = mc.n as f64;
    let alt = sigma + h / n.sqrt();
    if alt <= 0.0 {
        return Err(Error::domain("sigma + h/sqrt(n) must be positive"));
    }
    let info = match score::fisher_scale(d, sigma, cfg)? {
        ExtendedReal::Finite(v) => v,
        ExtendedReal::Infinite => return Err(Error::InformationInfinite),
    };
    let here = d.scale(sigma)?;
    let moved = d.scale(alt)?;
    let per_rep = replicate(mc, |rng| {
        let xs = here.sample_with(rng, mc.n);
        let mut l = 0.0;
        let mut s = 0.0;
        for &x in &xs {
            if x == 0.0 {
                continue;
            }
            l += moved.ln_density(x).unwrap_or(0.0) - here.ln_density(x).unwrap_or(0.0);
            s += score.eval_sigma(sigma, x);
        }
        let t = h / n.sqrt() * s - 0.5 * h * h * info;
        (l, l - t)
    })?;
    let ls: Vec<f64> = per_rep.iter().map(|r| r.0).collect();
    let rem: Vec<f64> = per_rep.iter().map(|r| r.1).collect();
    let abs_rem: Vec<f64> = rem.iter().map(|r| r.abs()).collect();
    let sl = Statistic::from_values("L", &ls);
    let target_mean = -0.5 * h * h * info;
    let target_var = h * h * info;
    let combined = (sl.se_mean.powi(2) + (0.5 * sl.se_variance).powi(2)).sqrt();
    let checks = vec![
        Check::within("mean_L", sl.mean, target_mean, 3.0 * sl.se_mean),
        Check::within("var_L", sl.variance, target_var, 0.15 * target_var),
        Check::within("mean_plus_half_var", sl.mean + 0.5 * sl.variance, 0.0, 4.0 * combined),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(McReport {
        kind: "lan".into(),
        n: mc.n,
        reps: mc.reps,
        seed: mc.seed,
        statistics: vec![
            sl,
            Statistic::from_values("L_minus_T", &rem),
            Statistic::from_values("abs_L_minus_T", &abs_rem),
        ],
        checks,
        failures: 0,
        pass,
    })
}

/// LAN runs at successively doubled sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanTrend {
    pub runs: Vec<McReport>,
    /// `mean|L − T|` at each sample size.
    pub mean_abs_remainder: Vec<f64>,
    pub decreasing: bool,
}

/// Runs `lan_sample` at `n, 2n, …, 2^doublings n` with the same master seed.
pub fn lan_trend(
    d: &Distribution,
    sigma: f64,
    h: f64,
    mc: &McConfig,
    doublings: usize,
    cfg: &QuadratureConfig,
) -> Result<LanTrend> {
    let runs = (0..=doublings)
        .map(|k| {
            let step = McConfig { n: mc.n << k, ..*mc };
            lan_sample(d, sigma, h, &step, cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mean_abs_remainder: Vec<f64> = runs
        .iter()
        .map(|r| r.statistic("abs_L_minus_T").map_or(f64::NAN, |s| s.mean))
        .collect();
    let decreasing = mean_abs_remainder.windows(2).all(|w| w[1] < w[0]);
    Ok(LanTrend {
        runs,
        mean_abs_remainder,
        decreasing,
    })
}

/// Replicates `m_estimate` on samples from `scale(d, σ)` and compares the
/// variance of `√n (S_n − σ)` with `σ² V₁(φ, F)`, within 10%. More than 1%
/// root-finding failures fails the run.
pub fn mc_variance(
    d: &Distribution,
    score: &ScaleScore,
    sigma: f64,
    mc: &McConfig,
    cfg: &QuadratureConfig,
) -> Result<McReport> {
    mc.validate()?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::domain("sigma must be positive"));
    }
    if !score.monotone {
        return Err(Error::domain("Monte Carlo variance needs a monotone score"));
    }
    let v1 = match mest::asym_variance(score, d, cfg)? {
        AsymVariance::Finite(v) => v,
        _ => return Err(Error::domain("asymptotic variance is not finite")),
    };
    let here = d.scale(sigma)?;
    let root_n = (mc.n as f64).sqrt();
    let per_rep = replicate(mc, |rng| {
        let xs = here.sample_with(rng, mc.n);
        mest::m_estimate(&xs, score).ok().map(|e| root_n * (e.scale - sigma))
    })?;
    let values: Vec<f64> = per_rep.iter().flatten().copied().collect();
    let failures = mc.reps - values.len();
    if values.len() < 2 {
        return Err(Error::domain("fewer than two replicates produced an estimate"));
    }
    let stat = Statistic::from_values("sqrt_n_error", &values);
    let target = sigma * sigma * v1;
    let checks = vec![
        Check::within("variance", stat.variance, target, 0.10 * target),
        Check::below("failure_rate", failures as f64 / mc.reps as f64, 0.01 + f64::EPSILON),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(McReport {
        kind: "mc_variance".into(),
        n: mc.n,
        reps: mc.reps,
        seed: mc.seed,
        statistics: vec![stat],
        checks,
        failures,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub id: String,
    pub v1: AsymVariance,
    pub inverse_information: f64,
    pub efficiency: Efficiency,
    /// `V₁ ≥ 1/I − 1e-8`; degenerate rows pass vacuously.
    pub respects_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundTable {
    pub information: f64,
    pub rows: Vec<BoundRow>,
    pub pass: bool,
}

pub fn bound_report(d: &Distribution, scores: &[ScaleScore], cfg: &QuadratureConfig) -> Result<BoundTable> {
    let information = match score::fisher_closed(d, cfg)? {
        ExtendedReal::Finite(v) if v > 0.0 => v,
        ExtendedReal::Finite(_) => return Err(Error::domain("information bound needs positive information")),
        ExtendedReal::Infinite => return Err(Error::InformationInfinite),
    };
    let inverse = 1.0 / information;
    let rows = scores
        .iter()
        .map(|s| {
            let v1 = mest::asym_variance(s, d, cfg)?;
            let efficiency = mest::efficiency(s, d, cfg)?;
            let respects_bound = match v1 {
                AsymVariance::Finite(v) => v >= inverse - 1e-8,
                _ => true,
            };
            Ok(BoundRow {
                id: s.label.clone(),
                v1,
                inverse_information: inverse,
                efficiency,
                respects_bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.respects_bound);
    Ok(BoundTable {
        information,
        rows,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mest::ScoreSpec;

    fn cfg() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn pairwise_sum_matches_plain_sum_on_integers() {
        let xs: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn replicate_seeds_differ() {
        let a: Vec<u64> = (0..100).map(|i| replicate_seed(7, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), a.len());
    }

    #[test]
    fn l2_remainder_is_linear_in_t_for_normal() {
        let n = Distribution::normal();
        let r1 = l2_remainder(&n, 1.0, 0.01, &cfg()).unwrap();
        let r2 = l2_remainder(&n, 1.0, 0.02, &cfg()).unwrap();
        let ratio = r1 / r2;
        assert!((0.4..=0.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn l2_remainder_scales_with_atom_mass() {
        let n = Distribution::normal();
        let eps = 0.3;
        let a = l2_remainder(&n, 1.0, 0.02, &cfg()).unwrap();
        let b = l2_remainder(&n.with_atom0(eps).unwrap(), 1.0, 0.02, &cfg()).unwrap();
        assert!((b / a - (1.0f64 - eps).sqrt()).abs() < 1e-8);
    }

    #[test]
    fn l2_remainder_rejects_irregular_and_bad_steps() {
        let u = Distribution::uniform(0.0, 2.0).unwrap();
        assert_eq!(l2_remainder(&u, 1.0, 0.01, &cfg()), Err(Error::InformationInfinite));
        let n = Distribution::normal();
        assert!(l2_remainder(&n, 1.0, 0.0, &cfg()).is_err());
        assert!(l2_remainder(&n, 1.0, -1.0, &cfg()).is_err());
    }

    #[test]
    fn lan_small_run_is_reproducible_across_workers() {
        let n = Distribution::normal();
        let one = McConfig { n: 200, reps: 64, seed: 3, workers: 1 };
        let four = McConfig { workers: 4, ..one };
        let a = lan_sample(&n, 1.0, 1.0, &one, &cfg()).unwrap();
        let b = lan_sample(&n, 1.0, 1.0, &four, &cfg()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.statistics.len(), 3);
    }

    #[test]
    fn lan_rejects_invalid_configuration() {
        let n = Distribution::normal();
        let mc = McConfig { n: 4, reps: 10, seed: 1, workers: 1 };
        assert!(lan_sample(&n, 1.0, -3.0, &mc, &cfg()).is_err());
        let one_rep = McConfig { reps: 1, ..mc };
        assert!(lan_sample(&n, 1.0, 1.0, &one_rep, &cfg()).is_err());
        let u = Distribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(lan_sample(&u, 1.0, 1.0, &mc, &cfg()), Err(Error::InformationInfinite));
    }

    #[test]
    fn bound_report_examples() {
        let n = Distribution::normal();
        let scores: Vec<ScaleScore> = ["lambda", "huber(1.5)", "chi2"]
            .iter()
            .map(|s| s.parse::<ScoreSpec>().unwrap().build(&n, &cfg()).unwrap())
            .collect();
        let table = bound_report(&n, &scores, &cfg()).unwrap();
        assert!(table.pass);
        assert_eq!(table.rows.len(), 3);
        assert!((table.rows[0].efficiency.value - 1.0).abs() < 1e-8);
        assert!(table.rows.iter().all(|r| r.efficiency.value <= 1.0 + 1e-8));
        assert!(bound_report(&n, &[], &cfg()).unwrap().rows.is_empty());
    }

    #[test]
    fn statistic_standard_error() {
        let s = Statistic::from_values("x", &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.se_mean - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }
}
