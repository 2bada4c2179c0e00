//! Front end for the analyzer: the `.wco` format, reports, commands and
//! the fixture regression suite.

pub mod commands;
pub mod report;
pub mod spec_file;
pub mod suite;
