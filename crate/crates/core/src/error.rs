use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no density: distribution has no continuous part")]
    NoDensity,

    #[error("no continuous support: cannot place basis bumps on a pure-atom distribution")]
    NoContinuousSupport,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("quadrature did not converge: best estimate {estimate:e}, error bound {error_bound:e}")]
    Quadrature { estimate: f64, error_bound: f64 },

    #[error("score undefined (information infinite)")]
    InformationInfinite,

    #[error("basis too rich for sample: n = {n} < 2m = {}", 2 * .m)]
    BasisTooRich { n: usize, m: usize },

    #[error("scale unidentified: all observations are zero")]
    ScaleUnidentified,

    #[error("no root: estimating equation does not change sign on [{lo:e}, {hi:e}]")]
    NoRoot { lo: f64, hi: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
