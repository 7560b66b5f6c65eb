//! Pseudo-spectral solver and verification harness for the incompressible
//! Navier-Stokes equations and their calmed variants on the periodic box
//! [0, 2pi)^3 with mean-free fields.
//!
//! The calmed systems replace the advective velocity (advective form) or the
//! Lamb-vector factor (rotational form) by a bounded Lipschitz-1 truncation
//! zeta of the velocity. Modules:
//!
//! - [`calming`]: the four calming functions with certified bounds
//! - [`spectral`]: transforms, Leray projection, Stokes operator, norms
//! - [`nonlinear`]: advective and rotational nonlinearities, calmed or not
//! - [`timestepper`]: integrating-factor RK2 integration of the truncated
//!   spectral system
//! - [`diagnostics`]: energy-identity residuals, difference norms,
//!   absorbing-ball statistics, experiment reports
//! - [`config`]: the flat key-value config format

pub mod calming;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod nonlinear;
pub mod spectral;
pub mod timestepper;

pub use calming::{CalmingFunction, CalmingKind};
pub use diagnostics::{
    absorbing_ball_stats, difference_norms, energy_residual, grad_bound_window,
    AbsorbingBallStats, DifferenceNorms, ExperimentReport, ReportRow, TrajectoryRecord, Verdict,
};
pub use error::{Error, Result};
pub use nonlinear::{eval_nonlinearity, trilinear_b, FormKind, NonlinearForm};
pub use spectral::{Fft3, Grid, PhysicalField, SpectralField};
pub use timestepper::{run, step, DtSpec, ForcingSpec, InitialSpec, SolverConfig};

/// Effective worker count: this build's kernels are sequential, so the value
/// is 1, optionally capped (trivially) by the CNSE_THREADS variable. Invalid
/// values are rejected.
pub fn worker_count() -> Result<usize> {
    match std::env::var("CNSE_THREADS") {
        Err(_) => Ok(1),
        Ok(v) => {
            let cap: usize = v.parse().map_err(|_| {
                Error::InvalidParameter(format!("CNSE_THREADS must be a positive integer, got `{v}`"))
            })?;
            if cap == 0 {
                return Err(Error::InvalidParameter(
                    "CNSE_THREADS must be a positive integer, got `0`".into(),
                ));
            }
            Ok(cap.min(1))
        }
    }
}
