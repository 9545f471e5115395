use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    /// The requested integral does not exist for this parameter set.
    #[error("divergent parameter set: {0}")]
    Divergent(&'static str),

    #[error("not implemented: {0}")]
    NotImplemented(&'static str),

    /// The route does not apply to this amplitude kind.
    #[error("route {route} is not available for {kind}")]
    UnsupportedRoute { kind: &'static str, route: &'static str },

    #[error("invalid quadrature plan: {0}")]
    InvalidPlan(&'static str),

    /// The integrand produced NaN or an infinity at an interior node.
    #[error("integrand is not finite at x = {x}")]
    NonFinite { x: f64 },

    /// Two algebraically equal routes disagreed beyond rounding.
    #[error("internal consistency check failed: {what} ({lhs} vs {rhs})")]
    Consistency {
        what: &'static str,
        lhs: f64,
        rhs: f64,
    },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
