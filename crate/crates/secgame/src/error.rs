use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the exit-code category the
/// CLI maps them to: configuration/validation (2), solver capacity (3), I/O (4).
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or inconsistent configuration (system configs, scenario
    /// files, network files, CLI arguments).
    #[error("config error: {0}")]
    Config(String),

    /// A structurally valid input that violates a model invariant
    /// (unknown component, cyclic architecture, bad probability, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// The pure-strategy profile space exceeds the enumeration cap.
    #[error(
        "solver capacity exceeded: {profiles} pure profiles > cap {cap}; \
         use the routing dynamic program, backward induction (singleton \
         information sets), or a coarser action grid"
    )]
    SolverCap { profiles: f64, cap: u64 },

    /// Underlying file-system or encoding failure.
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the CLI for this error category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::Validation(_) => 2,
            Error::SolverCap { .. } => 3,
            Error::Io(_) => 4,
        }
    }
}
