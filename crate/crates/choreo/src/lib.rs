//! Command-line front end for the choreography checker: run specifications,
//! canonical JSON, trace files and the subcommands.

pub mod commands;
pub mod json;
pub mod parallel;
pub mod spec;
pub mod trace;
