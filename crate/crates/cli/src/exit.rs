//! Error classes and their process exit codes.

use std::fmt;

use spmid_core::Error as CoreError;

pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_MISSING_INPUT: u8 = 4;

/// Invalid or unreadable configuration.
#[derive(Debug)]
pub struct ConfigError(pub String);

/// An input the command needs has not been produced yet.
#[derive(Debug)]
pub struct MissingInput(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl fmt::Display for MissingInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "missing input: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}
impl std::error::Error for MissingInput {}

/// Exit code for an error, from the first classifiable cause in its chain.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<MissingInput>() {
            return EXIT_MISSING_INPUT;
        }
        if let Some(core) = cause.downcast_ref::<CoreError>() {
            if core.is_simulation_failure() {
                return EXIT_INFEASIBLE;
            }
            match core {
                CoreError::InvalidConfig(_) | CoreError::InvalidParameter { .. } => return EXIT_CONFIG,
                CoreError::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                    return EXIT_MISSING_INPUT
                }
                _ => {}
            }
        }
        if let Some(io) = cause.downcast_ref::<std::io::Error>() {
            if io.kind() == std::io::ErrorKind::NotFound {
                return EXIT_MISSING_INPUT;
            }
        }
    }
    EXIT_FAILURE
}

#[cfg(test)]
mod tests {
    use super::*;
    use anyhow::Context;

    #[test]
    fn classification() {
        let e = anyhow::Error::new(ConfigError("x".into()));
        assert_eq!(exit_code(&e), EXIT_CONFIG);
        let e = anyhow::Error::new(MissingInput("x".into())).context("while validating");
        assert_eq!(exit_code(&e), EXIT_MISSING_INPUT);
        let e: anyhow::Error = CoreError::KineticSingularity(1.0).into();
        assert_eq!(exit_code(&e), EXIT_INFEASIBLE);
        let e = Err::<(), _>(std::io::Error::new(std::io::ErrorKind::NotFound, "gone"))
            .context("reading")
            .unwrap_err();
        assert_eq!(exit_code(&e), EXIT_MISSING_INPUT);
        assert_eq!(exit_code(&anyhow::anyhow!("other")), EXIT_FAILURE);
    }
}
