//! Library side of the `wallforge` binary: configuration, reports and the run pipeline.

pub mod config;
pub mod report;
pub mod run;
pub mod verify;

use wallforge::WallError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    ConfigParse(String),
    #[error(transparent)]
    Wall(#[from] WallError),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    /// Machine-readable error kind for `report.json`.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::ConfigParse(_) => "ConfigParse",
            CliError::Io(_) => "Io",
            CliError::Wall(e) => match e {
                WallError::NonPositiveValue { .. }
                | WallError::UnsortedBreakpoints { .. }
                | WallError::SegmentCountMismatch { .. } => "InvalidWeight",
                WallError::DomainTooSmall(_) => "DomainTooSmall",
                WallError::InvalidGrid(_) => "InvalidGrid",
                WallError::InvalidOptions(_) => "InvalidOptions",
                WallError::NoConvergence { .. } => "NoConvergence",
                WallError::MonotonicityViolation { .. } => "MonotonicityViolation",
                WallError::ProfileNotConverged { .. } => "ProfileNotConverged",
                WallError::EigenNoConvergence { .. } => "EigenNoConvergence",
                WallError::NonPositivePsi { .. } => "NonPositivePsi",
                WallError::NotTangential { .. } => "NotTangential",
                WallError::NoSignChange(_) => "NoSignChange",
                WallError::Quadrature(_) => "Quadrature",
                WallError::DimensionMismatch { .. } => "DimensionMismatch",
            },
        }
    }
}
