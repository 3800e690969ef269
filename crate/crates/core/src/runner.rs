//! Experiment configuration, execution, logging, sweeps, and plots.

pub mod plot;
