//! Fisher information of scale for one-dimensional distributions.
//!
//! Two independent routes to the same quantity are provided:
//!
//! - [`score`]: the closed form `∫ Λ² dF₀` with the scale score
//!   `Λ(x) = −(1 + x f′(x)/f(x))`, `Λ(0) := 0`, evaluated by quadrature against
//!   the punctuated measure (the distribution with its atom at zero removed).
//! - [`varinfo`]: the variational definition, the supremum of
//!   `(∫ x φ′ dF)² / ∫ φ² dF` over differentiable `φ` whose derivative is
//!   continuous with compact support. It is maximized exactly over the span of
//!   a finite basis of raised-cosine bumps, which reduces to a generalized
//!   Rayleigh quotient `bᵀ M⁺ b`.
//!
//! Around these sit M-estimators of scale ([`mest`]), Monte Carlo and
//! quadrature checks of the asymptotic claims ([`asymp`]), and a command line
//! front end ([`cli`]) that writes versioned JSON/CSV reports ([`report`]).
//!
//! ```
//! use fisher_scale::{dist::Distribution, quad::QuadratureConfig, score};
//!
//! let cfg = QuadratureConfig::default();
//! let info = score::fisher_closed(&Distribution::normal(), &cfg).unwrap();
//! assert!((info.value().unwrap() - 2.0).abs() < 1e-8);
//! ```

pub mod asymp;
pub mod cli;
pub mod dist;
pub mod error;
pub mod extended;
pub mod mest;
pub mod quad;
pub mod report;
pub mod score;
pub mod varinfo;

pub use error::{Error, Result};
pub use extended::ExtendedReal;
