//! Sweeps and the check suite behind the `wideband` binary.

pub mod check;
pub mod config;
pub mod sweep;
