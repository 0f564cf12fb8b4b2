//! Noise law `σᵢ² = λᵢ⁻³`, seeded Wiener increments, the Stokes
//! Ornstein–Uhlenbeck process and exponential tail fits of its supremum.

mod forcing;
mod ou;
mod spec;
mod tail;
mod wiener;

pub use forcing::NoiseForcing;
pub(crate) use forcing::forcing_variance;
pub use ou::{ou_mode_variance, ou_second_moment_oracle, simulate_stokes_ou, OUTrajectory, Recording};
pub use spec::{noise_coefficients, NoiseSpec};
pub use tail::{fit_exponential_tail, fit_joint_tail, TailBin, TailFit, TailStatus};
pub use wiener::{sample_wiener, WienerPath};
