//! Library half of the `admnet` command-line tool: the on-disk document
//! format and the command implementations, kept separate from the binary so
//! integration tests can drive them directly.

pub mod commands;
pub mod spec;
