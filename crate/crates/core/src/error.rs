use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// An iterative method or quadrature failed its convergence check.
    #[error("numerical failure in {op}: {detail}")]
    Numeric { op: &'static str, detail: String },

    /// No saddlepoint exists for the requested target. The feasible
    /// interval of the target (in the units of the request) is attached.
    #[error("no saddlepoint for {what} = {target}; feasible interval is [{lo}, {hi}]")]
    SaddleNotFound {
        what: &'static str,
        target: f64,
        lo: f64,
        hi: f64,
    },

    /// The bound is vacuous or infeasible everywhere on the search range.
    #[error("no solution: {0}")]
    NoSolution(String),
}

impl Error {
    pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            op,
            detail: detail.into(),
        }
    }

    pub(crate) fn numeric(op: &'static str, detail: impl Into<String>) -> Self {
        Error::Numeric {
            op,
            detail: detail.into(),
        }
    }

    /// True for errors that mean "this target cannot be reached", as
    /// opposed to bad input or a numerical breakdown.
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::SaddleNotFound { .. } | Error::NoSolution(_))
    }
}
