//! Configuration loading and suite orchestration behind the `mpqg` binary.

pub mod config;
pub mod run;
