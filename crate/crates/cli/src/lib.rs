//! Configuration, orchestration and CSV output for the `dotbus` binary.

pub mod commands;
pub mod config;
pub mod output;
pub mod plot;

pub use commands::{NumericalFailure, Outcome, RunContext};
pub use config::{ConfigError, ExperimentConfig};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const REGIME: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Exit code for a failed command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.downcast_ref::<NumericalFailure>().is_some() {
        return exit::NUMERICAL;
    }
    match err.downcast_ref::<dotbus::Error>() {
        Some(e) if e.is_numerical() => exit::NUMERICAL,
        _ => exit::USAGE,
    }
}
