use degwave::attractor::{AttractorError, CloudError};
use degwave::diagnostics::{DecayRunError, GronwallError};
use degwave::dimension::DimensionError;
use degwave::dynamics::DynamicsError;
use degwave::ConfigError;
use thiserror::Error;

/// Failures mapped to the documented exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    /// Exit 2: bad or missing config, input file or argument.
    #[error("{0}")]
    Input(String),
    /// Exit 3: the integrator failed.
    #[error("integration failed: {0}")]
    Integration(String),
    /// Exit 4: no scaling window for a box-counting slope.
    #[error("no scaling window: {0}")]
    NoWindow(String),
    /// Exit 1: writing outputs failed.
    #[error("output error: {0}")]
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Output(_) => 1,
            CliError::Input(_) => 2,
            CliError::Integration(_) => 3,
            CliError::NoWindow(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Input(msg) => CliError::Input(msg),
            other => CliError::Integration(other.to_string()),
        }
    }
}

impl From<AttractorError> for CliError {
    fn from(e: AttractorError) -> Self {
        match e {
            AttractorError::Input(msg) => CliError::Input(msg),
            AttractorError::Cloud(c) => c.into(),
            AttractorError::Dynamics(d) => d.into(),
            budget @ AttractorError::Budget { .. } => CliError::Integration(budget.to_string()),
        }
    }
}

impl From<CloudError> for CliError {
    fn from(e: CloudError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<DecayRunError> for CliError {
    fn from(e: DecayRunError) -> Self {
        match e {
            DecayRunError::Dynamics(d) => d.into(),
            DecayRunError::Fit(f) => CliError::Input(format!("decay fit: {f}")),
        }
    }
}

impl From<DimensionError> for CliError {
    fn from(e: DimensionError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<GronwallError> for CliError {
    fn from(e: GronwallError) -> Self {
        CliError::Input(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Output(e.to_string())
    }
}
