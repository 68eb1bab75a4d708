use pnrtomo::Error as CoreError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;
pub const EXIT_INCONSISTENT: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("inconsistent measurements: {0}")]
    Inconsistent(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Invariant(_) => EXIT_INVARIANT,
            CliError::Inconsistent(_) => EXIT_INCONSISTENT,
            CliError::Io(_) => EXIT_IO,
        }
    }

    /// Failure while turning the config into states, channels and plans.
    pub fn setup(e: CoreError) -> Self {
        match e {
            CoreError::InconsistentMeasurements { .. } => CliError::Inconsistent(e.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }

    /// Failure while simulating or inverting.
    pub fn run(e: CoreError) -> Self {
        match e {
            CoreError::InconsistentMeasurements { .. } => CliError::Inconsistent(e.to_string()),
            other => CliError::Invariant(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
