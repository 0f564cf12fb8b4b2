//! Monte Carlo estimates of transition kernels and the numerical checks
//! built on them.
//!
//! Every experiment takes a [`StreamId`](crate::StreamId); path `i` draws
//! from `stream.child(i)` (or a named child of it), paths run in parallel
//! and results are reduced in path order, so reports are bit-reproducible
//! for any worker count.

mod bel;
mod blowup;
mod calibration;
mod chapman;
mod confronto;
mod event;
mod kernel;
mod loglip;
mod model;
mod ou;
mod regularity;
mod telescope;

pub use bel::{bel_gradient, flow_bound_check, fd_order_check, FdOrderReport, FlowBoundReport, GradientEstimate};
pub use blowup::{blowup_tail_experiment, BlowupPoint, BlowupReport};
pub use calibration::{calibrate, CalibrationPlan, FrozenConstants};
pub use chapman::{chapman_kolmogorov_check, ChapmanReport};
pub use confronto::{confronto_check, ConfrontoReport};
pub use event::{EventSpec, Observable};
pub use kernel::{estimate_kernel, KernelEstimate};
pub use loglip::{epsilon_rule, loglip_experiment, LogLipPoint, LogLipReport};
pub use model::{map_paths, Model};
pub use ou::{ou_moment_check, ou_tail_experiment, quantile_grid, OuMomentReport, OuModeCheck};
pub use regularity::{det_bound_experiment, DetBoundReport};
pub use telescope::{telescoping_compare, TelescopePoint, TelescopeReport};

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::spectral::SpectralError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid parameter `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> LabError {
    LabError::Invalid {
        field,
        reason: reason.into(),
    }
}
