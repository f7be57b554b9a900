//! Command-line pipelines over `tenfold-core`: model files in, run reports
//! and sweep tables out.

pub mod commands;
pub mod error;
pub mod model_file;
pub mod report;
