//! File formats, command-line interface, scenario registry and slow
//! independent oracles for `loghls-core`.

pub mod cli;
pub mod config;
pub mod error;
pub mod io;
pub mod oracle;
pub mod parse;
pub mod scenarios;

pub use error::{HarnessError, Result};
