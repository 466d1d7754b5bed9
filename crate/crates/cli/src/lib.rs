//! Library side of the `hyperband` binary: argument parsing, validation into a
//! [`RunConfig`] and execution.

pub mod args;
pub mod config;
pub mod run;

pub use args::Cli;
pub use config::{BandSource, CommandConfig, DataPaths, RunConfig};
pub use run::run;

use hyperband_core::Error;

/// Environment variable capping worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "HYPERBAND_THREADS";

/// Parses the thread cap. `None` means rayon's default.
pub fn thread_count(value: Option<&str>) -> Result<Option<usize>, Error> {
    match value.map(str::trim) {
        None | Some("") => Ok(None),
        Some(v) => match v.parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::InvalidConfig(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        },
    }
}

/// 2 for internal invariant violations, 1 for everything else.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Internal(_) => 2,
        _ => 1,
    }
}
