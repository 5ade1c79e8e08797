//! Experiment harness: JSON configs, the six experiments, the acceptance
//! criteria and CSV output.

pub mod acceptance;
pub mod config;
pub mod experiments;
pub mod output;
