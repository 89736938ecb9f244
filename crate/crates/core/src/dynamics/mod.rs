//! Time integration of the full problem, the v/w decomposition, the
//! linearization and its V/W split. Coupled systems are advanced as one vector
//! field so all components share the same steps.

mod system;

pub use system::{packed_len, GalerkinSystem, SystemKind};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrate::{
    Dopri5, Dopri5Options, ImplicitMidpoint, IntegrateError, MidpointOptions, SolverStats, VectorField,
};
use crate::model::{ModalState, ProblemConfig, SpectralBasis};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Integrate(#[from] IntegrateError),
    #[error("invalid input: {0}")]
    Input(String),
}

/// Which times are written to the trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sampling {
    /// Every accepted step.
    Steps,
    /// The given times (dense output between steps); `t = 0` is always included.
    Times(Vec<f64>),
    /// Every multiple of the spacing, plus the final time.
    Uniform(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Stepper {
    /// Adaptive Dormand–Prince 5(4).
    Dopri5,
    /// Fixed-step implicit midpoint for stiff high-mode runs.
    ImplicitMidpoint { h: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub sampling: Sampling,
    pub stepper: Stepper,
    /// Keep per-step statistics (disable for very long runs).
    pub record_steps: bool,
    pub max_steps: u64,
    pub h_max: f64,
    /// Overrides the config tolerances `(atol, rtol)`.
    pub tolerances: Option<(f64, f64)>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            sampling: Sampling::Steps,
            stepper: Stepper::Dopri5,
            record_steps: true,
            max_steps: 200_000_000,
            h_max: f64::INFINITY,
            tolerances: None,
        }
    }
}

impl RunOptions {
    pub fn sampled(sampling: Sampling) -> Self {
        Self {
            sampling,
            ..Self::default()
        }
    }

    pub fn with_tolerances(mut self, atol: f64, rtol: f64) -> Self {
        self.tolerances = Some((atol, rtol));
        self
    }

    pub fn without_step_log(mut self) -> Self {
        self.record_steps = false;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStat {
    /// End of the step.
    pub t: f64,
    pub h: f64,
    pub err: f64,
}

/// Time-stamped states of one component of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ModalState>,
    pub step_stats: Vec<StepStat>,
    /// `∫₀ᵗ I_{u,p}‖u_t‖²` of the driving solution at each output time.
    pub damping_integral: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &ModalState {
        self.states.last().expect("empty trajectory")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }

    pub fn phase_norms(&self, basis: &SpectralBasis) -> Vec<f64> {
        self.states.iter().map(|s| s.phase_norm(basis)).collect()
    }
}

/// Raw output of a packed run.
#[derive(Debug, Clone)]
pub struct PackedRun {
    pub times: Vec<f64>,
    pub samples: Vec<Vec<f64>>,
    pub step_stats: Vec<StepStat>,
    pub stats: SolverStats,
}

impl PackedRun {
    fn block(&self, n: usize, block: usize) -> Vec<ModalState> {
        let o = 2 * n * block;
        self.samples
            .iter()
            .map(|y| ModalState::from_packed(&y[o..o + 2 * n]))
            .collect()
    }

    fn trajectory(&self, n: usize, block: usize, with_q: bool) -> Trajectory {
        Trajectory {
            times: self.times.clone(),
            states: self.block(n, block),
            step_stats: self.step_stats.clone(),
            damping_integral: if with_q {
                self.samples.iter().map(|y| y[y.len() - 1]).collect()
            } else {
                Vec::new()
            },
        }
    }
}

fn output_targets(sampling: &Sampling, t_end: f64) -> Result<Vec<f64>, DynamicsError> {
    let mut v = match sampling {
        Sampling::Steps => return Ok(Vec::new()),
        Sampling::Times(ts) => ts.clone(),
        Sampling::Uniform(dt) => {
            if !(*dt > 0.0) {
                return Err(DynamicsError::Input(format!(
                    "sampling interval must be positive, got {dt}"
                )));
            }
            let n = (t_end / dt).floor() as usize;
            let mut v: Vec<f64> = (1..=n).map(|i| i as f64 * dt).collect();
            v.push(t_end);
            v
        }
    };
    if v.iter().any(|t| !t.is_finite()) {
        return Err(DynamicsError::Input("non-finite output time".into()));
    }
    v.retain(|&t| t > 0.0 && t <= t_end);
    v.sort_by(f64::total_cmp);
    v.dedup();
    Ok(v)
}

/// Integrates a packed vector field on `[0, t_end]`, calling `on_step` after
/// every accepted step with the step end time and state.
pub fn run_packed<F: VectorField>(
    field: F,
    y0: &[f64],
    t_end: f64,
    tolerances: (f64, f64),
    opts: &RunOptions,
    on_step: &mut dyn FnMut(f64, &[f64]),
) -> Result<PackedRun, DynamicsError> {
    if !(t_end > 0.0) || !t_end.is_finite() {
        return Err(DynamicsError::Input(format!(
            "horizon must be positive and finite, got {t_end}"
        )));
    }
    if y0.len() != field.len() {
        return Err(DynamicsError::Input("initial state has the wrong length".into()));
    }
    if !y0.iter().all(|x| x.is_finite()) {
        return Err(DynamicsError::Input("initial state is not finite".into()));
    }
    let targets = output_targets(&opts.sampling, t_end)?;
    let every_step = matches!(opts.sampling, Sampling::Steps);
    let mut run = PackedRun {
        times: vec![0.0],
        samples: vec![y0.to_vec()],
        step_stats: Vec::new(),
        stats: SolverStats::default(),
    };
    let mut next = 0;
    match opts.stepper {
        Stepper::Dopri5 => {
            let mut dopts = Dopri5Options::new(tolerances.0, tolerances.1);
            dopts.max_steps = opts.max_steps;
            dopts.h_max = opts.h_max;
            let mut s = Dopri5::new(field, 0.0, y0, dopts);
            let mut buf = vec![0.0; y0.len()];
            while s.time() < t_end {
                let rep = s.step(t_end)?;
                on_step(rep.t_new, s.state());
                if opts.record_steps {
                    run.step_stats.push(StepStat {
                        t: rep.t_new,
                        h: rep.h,
                        err: rep.err,
                    });
                }
                if every_step {
                    run.times.push(rep.t_new);
                    run.samples.push(s.state().to_vec());
                }
                while next < targets.len() && targets[next] <= rep.t_new {
                    let t = targets[next];
                    if t == rep.t_new {
                        run.samples.push(s.state().to_vec());
                    } else {
                        s.dense_into(t, &mut buf);
                        run.samples.push(buf.clone());
                    }
                    run.times.push(t);
                    next += 1;
                }
            }
            run.stats = s.stats();
        }
        Stepper::ImplicitMidpoint { h } => {
            if !(h > 0.0) {
                return Err(DynamicsError::Input(format!("midpoint step must be positive, got {h}")));
            }
            let mut s = ImplicitMidpoint::new(field, 0.0, y0, MidpointOptions::default());
            let mut steps = 0u64;
            while s.time() < t_end {
                if steps >= opts.max_steps {
                    return Err(IntegrateError::MaxSteps { t: s.time(), steps }.into());
                }
                let t = s.time();
                let stop = targets.get(next).copied().unwrap_or(t_end).min(t_end);
                let hh = if t + h >= stop { stop - t } else { h };
                let rep = s.step(hh)?;
                steps += 1;
                let t_new = if t + h >= stop { stop } else { rep.t_new };
                on_step(t_new, s.state());
                if opts.record_steps {
                    run.step_stats.push(StepStat {
                        t: t_new,
                        h: hh,
                        err: f64::NAN,
                    });
                }
                let hit = next < targets.len() && t_new >= targets[next];
                if every_step || hit {
                    run.times.push(t_new);
                    run.samples.push(s.state().to_vec());
                }
                if hit {
                    next += 1;
                }
                if t_new >= t_end {
                    break;
                }
            }
            run.stats = SolverStats {
                accepted: steps,
                rejected: 0,
                evaluations: 0,
            };
        }
    }
    Ok(run)
}

fn tolerances(config: &ProblemConfig, opts: &RunOptions) -> (f64, f64) {
    opts.tolerances.unwrap_or((config.tol_abs, config.tol_rel))
}

fn check_state(s: &ModalState, basis: &SpectralBasis, what: &str) -> Result<(), DynamicsError> {
    if s.len() != basis.len() {
        return Err(DynamicsError::Input(format!(
            "{what} has {} coefficients, basis has {}",
            s.len(),
            basis.len()
        )));
    }
    Ok(())
}

fn pack(blocks: &[&ModalState]) -> Vec<f64> {
    let mut y = Vec::new();
    for b in blocks {
        y.extend_from_slice(&b.a);
        y.extend_from_slice(&b.b);
    }
    y.push(0.0);
    y
}

/// Time derivative `(a', b')` of the full Galerkin system.
pub fn rhs_full(state: &ModalState, config: &ProblemConfig, basis: &SpectralBasis) -> ModalState {
    let mut sys = GalerkinSystem::new(SystemKind::Full, config, basis);
    let y = pack(&[state]);
    let mut dy = vec![0.0; y.len()];
    sys.eval(0.0, &y, &mut dy);
    ModalState::from_packed(&dy[..2 * basis.len()])
}

/// Result of [`step`].
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: ModalState,
    /// Step actually taken (≤ the requested one after rejections).
    pub h: f64,
    pub error: f64,
}

/// One accepted adaptive step starting with size `dt`.
pub fn step(
    state: &ModalState,
    dt: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
) -> Result<StepOutcome, DynamicsError> {
    check_state(state, basis, "state")?;
    if !(dt > 0.0) {
        return Err(DynamicsError::Input(format!("step must be positive, got {dt}")));
    }
    if dt < 1e-14 {
        return Err(IntegrateError::StepUnderflow { t: 0.0, h: dt }.into());
    }
    let mut opts = Dopri5Options::new(config.tol_abs, config.tol_rel);
    opts.h_init = Some(dt);
    opts.h_max = dt;
    let sys = GalerkinSystem::new(SystemKind::Full, config, basis);
    let mut s = Dopri5::new(sys, 0.0, &pack(&[state]), opts);
    let rep = s.step(dt)?;
    Ok(StepOutcome {
        state: ModalState::from_packed(&s.state()[..2 * basis.len()]),
        h: rep.h,
        error: rep.err,
    })
}

/// Integrates the full problem.
pub fn integrate(
    initial: &ModalState,
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
) -> Result<Trajectory, DynamicsError> {
    integrate_observed(initial, t_end, config, basis, opts, &mut |_, _| {})
}

/// As [`integrate`], also reporting the packed state `[a, b, q]` after every accepted step.
pub fn integrate_observed(
    initial: &ModalState,
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
    observer: &mut dyn FnMut(f64, &[f64]),
) -> Result<Trajectory, DynamicsError> {
    check_state(initial, basis, "initial state")?;
    let sys = GalerkinSystem::new(SystemKind::Full, config, basis);
    let run = run_packed(sys, &pack(&[initial]), t_end, tolerances(config, opts), opts, observer)?;
    Ok(run.trajectory(basis.len(), 0, true))
}

/// Output of [`integrate_decomposition`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionRun {
    pub shift: f64,
    pub u: Trajectory,
    pub v: Trajectory,
    pub w: Trajectory,
}

impl DecompositionRun {
    /// `sup_t ‖u − v − w‖ / sup_t ‖u‖` in the phase norm.
    pub fn reconstruction_defect(&self, basis: &SpectralBasis) -> f64 {
        relative_defect(&self.u.states, &self.v.states, &self.w.states, basis)
    }

    /// `Ĩ_v = ‖∇v‖² + ‖v_t‖² + λ‖v‖²` at each output time.
    pub fn shifted_energy_v(&self, basis: &SpectralBasis) -> Vec<f64> {
        self.v
            .states
            .iter()
            .map(|s| s.i_u(basis) + self.shift * s.l2_sq())
            .collect()
    }
}

fn relative_defect(u: &[ModalState], v: &[ModalState], w: &[ModalState], basis: &SpectralBasis) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for ((u, v), w) in u.iter().zip(v).zip(w) {
        num = num.max(u.phase_distance(&v.add(w), basis));
        den = den.max(u.phase_norm(basis));
    }
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Integrates `u = v + w` with shift `λ`; `v` starts from the data, `w` from 0.
pub fn integrate_decomposition(
    initial: &ModalState,
    shift: f64,
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
) -> Result<DecompositionRun, DynamicsError> {
    integrate_decomposition_observed(initial, shift, t_end, config, basis, opts, &mut |_, _| {})
}

/// As [`integrate_decomposition`], reporting the packed `[u, v, w, q]` after every accepted step.
pub fn integrate_decomposition_observed(
    initial: &ModalState,
    shift: f64,
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
    observer: &mut dyn FnMut(f64, &[f64]),
) -> Result<DecompositionRun, DynamicsError> {
    check_state(initial, basis, "initial state")?;
    if !(shift > -basis.lambda1()) {
        return Err(DynamicsError::Input(format!("shift must exceed −λ₁, got {shift}")));
    }
    let sys = GalerkinSystem::new(SystemKind::Decomposition, config, basis).with_shift(shift);
    let zero = ModalState::zeros(basis.len());
    let y0 = pack(&[initial, initial, &zero]);
    let run = run_packed(sys, &y0, t_end, tolerances(config, opts), opts, observer)?;
    let n = basis.len();
    Ok(DecompositionRun {
        shift,
        u: run.trajectory(n, 0, true),
        v: run.trajectory(n, 1, false),
        w: run.trajectory(n, 2, false),
    })
}

/// Output of [`integrate_linearized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearizedRun {
    pub u: Trajectory,
    pub tangent: Trajectory,
}

/// Integrates the base solution together with the variational equation.
pub fn integrate_linearized(
    u0: &ModalState,
    direction: &ModalState,
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
) -> Result<LinearizedRun, DynamicsError> {
    integrate_linearized_observed(u0, direction, t_end, config, basis, opts, &mut |_, _| {})
}

/// As [`integrate_linearized`], reporting the packed `[u, U, q]` after every accepted step.
pub fn integrate_linearized_observed(
    u0: &ModalState,
    direction: &ModalState,
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
    observer: &mut dyn FnMut(f64, &[f64]),
) -> Result<LinearizedRun, DynamicsError> {
    check_state(u0, basis, "base state")?;
    check_state(direction, basis, "direction")?;
    let sys = GalerkinSystem::new(SystemKind::Linearized, config, basis);
    let run = run_packed(
        sys,
        &pack(&[u0, direction]),
        t_end,
        tolerances(config, opts),
        opts,
        observer,
    )?;
    let n = basis.len();
    Ok(LinearizedRun {
        u: run.trajectory(n, 0, true),
        tangent: run.trajectory(n, 1, false),
    })
}

/// Output of [`integrate_vw`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VwRun {
    pub u: Trajectory,
    pub v: Trajectory,
    pub w: Trajectory,
}

impl VwRun {
    /// `sup_t ‖U − V − W‖ / sup_t ‖U‖` against a tangent sampled at the same times.
    pub fn reconstruction_defect(&self, tangent: &Trajectory, basis: &SpectralBasis) -> f64 {
        relative_defect(&tangent.states, &self.v.states, &self.w.states, basis)
    }
}

/// Integrates the split `U = V + W` of the linearized flow: `V` carries the
/// data under the nonlocal damping alone, `W` the coupling terms from rest.
pub fn integrate_vw(
    u0: &ModalState,
    direction: &ModalState,
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
) -> Result<VwRun, DynamicsError> {
    check_state(u0, basis, "base state")?;
    check_state(direction, basis, "direction")?;
    let sys = GalerkinSystem::new(SystemKind::VW, config, basis);
    let zero = ModalState::zeros(basis.len());
    let y0 = pack(&[u0, direction, &zero]);
    let run = run_packed(sys, &y0, t_end, tolerances(config, opts), opts, &mut |_, _| {})?;
    let n = basis.len();
    Ok(VwRun {
        u: run.trajectory(n, 0, true),
        v: run.trajectory(n, 1, false),
        w: run.trajectory(n, 2, false),
    })
}

/// Finite-difference check of the linearization at one base point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrechetReport {
    pub hs: Vec<f64>,
    /// `sup_t ‖S(t)(u₀+hξ) − S(t)u₀ − hU(t)‖` for each `h`.
    pub remainders: Vec<f64>,
    /// Least-squares slope of `ln remainder` against `ln h`.
    pub order: f64,
}

/// Runs `[u, U, ũ]` monolithically for each perturbation size and fits the
/// order of the linearization remainder.
pub fn frechet_probe(
    u0: &ModalState,
    direction: &ModalState,
    hs: &[f64],
    t_end: f64,
    config: &ProblemConfig,
    basis: &SpectralBasis,
    opts: &RunOptions,
) -> Result<FrechetReport, DynamicsError> {
    check_state(u0, basis, "base state")?;
    check_state(direction, basis, "direction")?;
    if hs.len() < 2 || hs.iter().any(|&h| !(h > 0.0)) {
        return Err(DynamicsError::Input(
            "need at least two positive perturbation sizes".into(),
        ));
    }
    let n = basis.len();
    let mut remainders = Vec::with_capacity(hs.len());
    for &h in hs {
        let perturbed = u0.add(&direction.scaled(h));
        let sys = GalerkinSystem::new(SystemKind::FrechetProbe, config, basis);
        let y0 = pack(&[u0, direction, &perturbed]);
        let run = run_packed(sys, &y0, t_end, tolerances(config, opts), opts, &mut |_, _| {})?;
        let u = run.block(n, 0);
        let lin = run.block(n, 1);
        let pert = run.block(n, 2);
        let mut worst: f64 = 0.0;
        for ((u, l), q) in u.iter().zip(&lin).zip(&pert) {
            worst = worst.max(q.phase_distance(&u.add(&l.scaled(h)), basis));
        }
        remainders.push(worst);
    }
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = remainders.iter().map(|r| r.max(f64::MIN_POSITIVE).ln()).collect();
    let order = crate::stats::linear_fit(&xs, &ys).slope;
    Ok(FrechetReport {
        hs: hs.to_vec(),
        remainders,
        order,
    })
}
