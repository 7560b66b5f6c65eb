//! Experiment layer of the verification harness: the calming property
//! suite and the per-theorem experiment drivers used by the `cnse` binary
//! and the acceptance suite.

pub mod calmcheck;
pub mod experiments;

pub use calmcheck::cmd_calmcheck;
pub use experiments::{cmd_attractor, cmd_cauchy, cmd_converge, cmd_energy, cmd_run};
