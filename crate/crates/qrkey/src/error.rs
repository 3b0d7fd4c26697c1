//! Shared error type for domain violations and numerical failures.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter fell outside its mathematical domain.
    #[error("{name} = {value} is outside {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A Bell coefficient was negative beyond the clamping tolerance.
    #[error("bell coefficient c{index} = {value} is negative beyond tolerance")]
    NegativeCoefficient { index: usize, value: f64 },

    /// Bell coefficients do not sum to one within tolerance.
    #[error("bell coefficients sum to {sum}, expected 1 within 1e-9")]
    Unnormalized { sum: f64 },

    /// A success probability collapsed to numerical zero.
    #[error("{context}: success probability {value} is degenerate")]
    Degenerate { context: &'static str, value: f64 },

    /// A matrix failed one of the density-matrix validity checks.
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(&'static str),

    /// The attempt-count series cannot deliver significant digits for these inputs.
    #[error("attempt-count series lost all significant digits (n = {n}, p = {p})")]
    SeriesPrecision { n: u32, p: f64 },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            domain,
        }
    }
}
