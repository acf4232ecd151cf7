use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("stability index {0} outside the admissible interval ({lo}, {hi})", lo = crate::specfun::ALPHA_GUARD, hi = 1.0 - crate::specfun::ALPHA_GUARD)]
    InvalidAlpha(f64),

    #[error("power exponent must be finite and nonzero, got {0}")]
    InvalidExponent(f64),

    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("quadrature did not reach tolerance: estimate {estimate:e} with error {abs_error:e}")]
    Accuracy { estimate: f64, abs_error: f64 },

    #[error("Mellin transform E[Z^s] diverges for s = {s} >= alpha = {alpha}")]
    Divergence { s: f64, alpha: f64 },

    #[error("criterion is not monotone in s: C({s_lo}) = {c_lo:e} but C({s_hi}) = {c_hi:e}")]
    NonMonotoneCriterion {
        s_lo: f64,
        c_lo: f64,
        s_hi: f64,
        c_hi: f64,
    },

    #[error("mode classification disagrees at alpha = {alpha}, r = {r}: analytic {analytic}, numeric {numeric}")]
    Discrepancy {
        alpha: f64,
        r: f64,
        analytic: String,
        numeric: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid rational parameter: {0}")]
    InvalidRational(String),
}
