//! File formats and command-line driver for the `avtseg-core` engine.

pub mod centers;
pub mod cli;
pub mod config;
pub mod folds;
pub mod manifest;
pub mod nifti;
pub mod report;
