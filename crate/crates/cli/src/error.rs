use cdo_ld_core::Error;

/// Process exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_ASSUMPTION: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_CONFIG: u8 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Assumption(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
        let context = context.into();
        move |source| CliError::Io { context, source }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => EXIT_CONFIG,
            Self::Assumption(_) => EXIT_ASSUMPTION,
            Self::Core(e) => core_exit_code(e),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io {
            context: "csv output".into(),
            source: e.into(),
        }
    }
}

pub fn core_exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidInput(_) => EXIT_CONFIG,
        Error::NoConvergence(_) | Error::NoEffectiveSamples => EXIT_NUMERIC,
        Error::State { source, .. } => core_exit_code(source),
        Error::InvestmentGrade { .. }
        | Error::NonDegenerate { .. }
        | Error::Infeasible { .. }
        | Error::DegenerateMeasure
        | Error::BoundaryMultiplier { .. }
        | Error::NoUniqueDominantState { .. } => EXIT_ASSUMPTION,
    }
}
