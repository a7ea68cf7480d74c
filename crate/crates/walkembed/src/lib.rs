//! Standard-library companion to `walkembed-core`: text formats, threaded
//! and streaming training, report output and the `walkembed` command line.

pub mod cli;
mod error;
pub mod fixtures;
pub mod formats;
pub mod output;
pub mod parallel;
pub mod report;
pub mod streaming;

pub use error::{Error, Result};
pub use parallel::train_parallel;
pub use walkembed_core as core;
