// SPDX-License-Identifier: Apache-2.0
//! Error type shared by every solver entry point.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The stencil, equation and boundary conditions do not form a supported pairing.
    #[error("unsupported discretization ({code}): {message}")]
    UnsupportedDiscretization { code: &'static str, message: String },

    /// The problem is well formed but lacks something the chosen solver needs,
    /// e.g. time derivatives of boundary data.
    #[error("invalid problem ({code}): {message}")]
    InvalidProblem { code: &'static str, message: String },

    #[error("quadrature did not reach the requested tolerance (achieved error estimate {achieved:.3e})")]
    AccuracyFailure { achieved: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("no oracle available: {0}")]
    UnsupportedOracle(String),
}

impl Error {
    /// Stable machine-readable code, used in CLI JSON output and Python exceptions.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::UnsupportedDiscretization { .. } => "unsupported-discretization",
            Error::InvalidProblem { .. } => "invalid-problem",
            Error::AccuracyFailure { .. } => "accuracy-failure",
            Error::NumericalFailure(_) => "numerical-failure",
            Error::ResourceLimit(_) => "resource-limit",
            Error::UnsupportedOracle(_) => "unsupported-oracle",
        }
    }

    /// Finer-grained reason, where one exists.
    pub fn reason(&self) -> Option<&'static str> {
        match self {
            Error::UnsupportedDiscretization { code, .. } | Error::InvalidProblem { code, .. } => {
                Some(code)
            }
            _ => None,
        }
    }

    /// True for failures caused by the inputs rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::UnsupportedDiscretization { .. }
                | Error::InvalidProblem { .. }
                | Error::UnsupportedOracle(_)
        )
    }

    pub(crate) fn derivatives_required(what: &str) -> Self {
        Error::InvalidProblem {
            code: "derivatives-required",
            message: what.to_string(),
        }
    }

    pub(crate) fn unsupported(code: &'static str, message: impl Into<String>) -> Self {
        Error::UnsupportedDiscretization {
            code,
            message: message.into(),
        }
    }
}
