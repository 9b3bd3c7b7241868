//! Library surface of the CLI, so integration tests can drive the
//! commands in-process. The binary in `main.rs` is a thin wrapper.

pub mod commands;
pub mod config;
pub mod output;
