//! File formats, batch execution, reports and the Monte-Carlo oracle for the
//! binaural detection model in [`binmodel_core`].

pub mod batch;
pub mod config;
pub mod data;
pub mod format;
pub mod oracle;
pub mod report;

mod error;

pub use binmodel_core;
pub use error::{Error, Result};
