//! Experiment harness: configuration, Monte Carlo sweeps, output files, and
//! the command-line interface.

pub mod cli;
pub mod config;
pub mod output;
pub mod sim;

pub use config::{Compensation, Detection, IqiSetting, SimConfig};
pub use sim::{run_point, run_sweep, BerRecord};
