//! Time steppers for first-order systems `y' = F(t, y)`.

mod dopri5;
mod midpoint;

pub use dopri5::{Dopri5, Dopri5Options, ErrorNorm, SolverStats};
pub use midpoint::{ImplicitMidpoint, MidpointOptions};

use thiserror::Error;

/// Right-hand side of a first-order system. Implementors own their scratch
/// buffers, so evaluation takes `&mut self`.
pub trait VectorField {
    fn len(&self) -> usize;
    fn eval(&mut self, t: f64, y: &[f64], dy: &mut [f64]);
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrateError {
    #[error("step size underflow at t = {t}: h = {h:e} (system too stiff for the explicit stepper)")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFinite { t: f64 },
    #[error("step budget of {steps} exhausted at t = {t}")]
    MaxSteps { t: f64, steps: u64 },
    #[error("Newton iteration did not converge at t = {t}")]
    NewtonFailure { t: f64 },
}

/// Summary of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub t_old: f64,
    pub t_new: f64,
    pub h: f64,
    /// Scaled local error estimate; `≤ 1` for accepted adaptive steps.
    pub err: f64,
}
