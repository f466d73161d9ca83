//! Command line, file formats and parallel execution for the stochastic
//! generalized Camassa-Holm experiments in `sgch-core`.

pub mod cli;
pub mod config;
pub mod exec;
pub mod experiments;
pub mod output;
