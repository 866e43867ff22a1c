//! IO, file formats, and command implementations behind the `qlease`
//! binary. Kept as a library so the commands are testable end to end.

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;
pub mod selftest;

pub const TOOL_NAME: &str = "qlease";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA_VERSION: u32 = 1;
