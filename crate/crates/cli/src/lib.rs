//! Command-line front end for latent relational analysis.

pub mod commands;
pub mod config;
pub mod report;
pub mod store;

use lra::LraError;

/// Process exit codes, one per error category.
pub mod exit {
    pub const OK: i32 = 0;
    pub const OTHER: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const INPUT: i32 = 4;
    pub const CONFIG: i32 = 5;
    pub const NUMERICAL: i32 = 6;
}

/// Maps an error to its exit code by the first categorizable cause.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<LraError>() {
            return match e {
                LraError::Io { .. } | LraError::Cache { .. } => exit::IO,
                LraError::Parse { .. } | LraError::InvalidPair(_) | LraError::UnknownClass(_) | LraError::Json(_) => {
                    exit::INPUT
                }
                LraError::InvalidParameter(_) | LraError::Config(_) => exit::CONFIG,
                LraError::TooFewRows(_)
                | LraError::SvdNonConvergence { .. }
                | LraError::EmptyMatrix
                | LraError::ZeroVector => exit::NUMERICAL,
            };
        }
        if cause.is::<toml::de::Error>() {
            return exit::CONFIG;
        }
        if cause.is::<std::io::Error>() {
            return exit::IO;
        }
    }
    exit::OTHER
}

#[cfg(test)]
mod tests {
    use anyhow::Context;

    use super::*;

    #[test]
    fn categories_survive_context() {
        let io: anyhow::Result<()> = Err(LraError::Io {
            path: "x".into(),
            source: std::io::Error::other("gone"),
        })
        .context("reading corpus");
        assert_eq!(exit_code(&io.unwrap_err()), exit::IO);
        assert_eq!(exit_code(&LraError::EmptyMatrix.into()), exit::NUMERICAL);
        assert_eq!(exit_code(&LraError::UnknownClass("q".into()).into()), exit::INPUT);
        assert_eq!(exit_code(&LraError::Config("bad".into()).into()), exit::CONFIG);
        assert_eq!(exit_code(&anyhow::anyhow!("mystery")), exit::OTHER);
    }
}
