//! File formats, the experiment pipeline and the command line around
//! `etc_core`.

pub mod cli;
pub mod error;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod vox;

pub use error::{Error, Result};
