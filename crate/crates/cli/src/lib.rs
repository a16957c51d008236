//! Library surface of the command-line driver; the binary in main.rs is a
//! thin argument-parsing shell over these modules.

pub mod commands;
pub mod config;
