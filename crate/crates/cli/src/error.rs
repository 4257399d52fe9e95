use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Accuracy(String),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Accuracy(_) => 3,
            CliError::Internal(_) => 4,
        }
    }

    /// Core errors raised while resolving the configuration are config errors.
    pub fn from_config(e: kgband::Error) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<kgband::Error> for CliError {
    fn from(e: kgband::Error) -> Self {
        use kgband::Error as E;
        match e {
            E::InvalidParameter { .. } | E::UnsupportedShape(_) | E::Aliasing { .. } | E::Precondition(_) => {
                CliError::Config(e.to_string())
            }
            E::Accuracy { .. } | E::NumericalDegeneracy(_) | E::DivergentSqueezing { .. } | E::InvalidState(_) | E::Domain(_) => {
                CliError::Accuracy(e.to_string())
            }
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(e.to_string())
    }
}
