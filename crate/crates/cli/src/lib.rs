//! File format, reports and subcommands of the `qle` tool.

pub mod commands;
pub mod format;
pub mod report;

pub use commands::Outcome;
pub use format::CoefficientFile;
