use alloc::boxed::Box;
use alloc::string::String;

/// Errors raised by the pricing library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "investment-grade assumption violated: mean default probability {mean} is not below attachment {alpha}"
    )]
    InvestmentGrade { mean: f64, alpha: f64 },

    #[error("non-degeneracy assumption violated: mass at p=0 is {mass_at_zero}, needs < {bound}")]
    NonDegenerate { mass_at_zero: f64, bound: f64 },

    #[error("attachment {alpha} is infeasible for this loss measure (mass at 1: {mass_at_one}, mass at 0: {mass_at_zero})")]
    Infeasible {
        alpha: f64,
        mass_at_one: f64,
        mass_at_zero: f64,
    },

    #[error("loss measure is the two-point law (1-a)δ0 + aδ1; the rate is 0 and no multiplier exists")]
    DegenerateMeasure,

    #[error("multiplier is {lambda}; the asymptotic formula needs a finite positive multiplier")]
    BoundaryMultiplier { lambda: f64 },

    #[error("numerical routine did not converge: {0}")]
    NoConvergence(&'static str),

    #[error("no unique dominant state: {first} and {second} have rates within tolerance")]
    NoUniqueDominantState { first: String, second: String },

    #[error("state {label}: {source}")]
    State { label: String, source: Box<Error> },

    #[error("no tilted sample produced a positive excess loss")]
    NoEffectiveSamples,
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
