//! Command-line front end: parser, printers and command runner.

pub mod latex;
pub mod metricfile;
pub mod parse;
pub mod report;
pub mod session;
