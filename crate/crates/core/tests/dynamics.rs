use std::f64::consts::PI;

use degwave::diagnostics::{energy, energy_equality_residual, lambda_u, lambda_u_default_eps};
use degwave::dynamics::{
    frechet_probe, integrate, integrate_decomposition, integrate_linearized, integrate_vw, rhs_full, GalerkinSystem,
    RunOptions, Sampling, SystemKind,
};
use degwave::initial::{random_direction, random_low_mode};
use degwave::integrate::{Dopri5, Dopri5Options, VectorField};
use degwave::{ModalState, ProblemConfig, SpectralBasis};
use proptest::prelude::*;

fn cubic(p: f64, n: usize) -> (ProblemConfig, SpectralBasis) {
    let c = ProblemConfig::builder(p).modes(n).poly(0.0, 1.0, 0.0).build().unwrap();
    let b = SpectralBasis::new(&c);
    (c, b)
}

fn first_mode(n: usize, a: f64, b: f64) -> ModalState {
    let mut s = ModalState::zeros(n);
    s.a[0] = a;
    s.b[0] = b;
    s
}

/// Advances the packed full system with `steps` fixed steps of size `h`.
fn fixed_steps(config: &ProblemConfig, basis: &SpectralBasis, s0: &ModalState, h: f64, steps: usize) -> ModalState {
    let sys = GalerkinSystem::new(SystemKind::Full, config, basis);
    let mut y0 = s0.packed();
    y0.push(0.0);
    let mut st = Dopri5::new(sys, 0.0, &y0, Dopri5Options::default());
    for _ in 0..steps {
        st.fixed_step(h).unwrap();
    }
    ModalState::from_packed(&st.state()[..2 * basis.len()])
}

#[test]
fn undamped_linear_mode_matches_harmonic_oscillator() {
    let c = ProblemConfig::builder(1.5)
        .modes(4)
        .poly(0.0, 0.0, 0.0)
        .damping_off(true)
        .build()
        .unwrap();
    let b = SpectralBasis::new(&c);
    let (a0, b0) = (0.7, -0.3);
    let s = fixed_steps(&c, &b, &first_mode(4, a0, b0), 1e-3, 1000);
    let t = 1.0;
    let exact_a = a0 * (PI * t).cos() + b0 / PI * (PI * t).sin();
    let exact_b = -a0 * PI * (PI * t).sin() + b0 * (PI * t).cos();
    assert!((s.a[0] - exact_a).abs() <= 1e-12, "{} vs {exact_a}", s.a[0]);
    assert!((s.b[0] - exact_b).abs() <= 1e-12, "{} vs {exact_b}", s.b[0]);
    assert!(s.a[1..].iter().chain(&s.b[1..]).all(|x| *x == 0.0));
}

#[test]
fn halving_the_step_reduces_global_error_eightfold() {
    let (c, b) = cubic(1.5, 4);
    let s0 = random_low_mode(&b, 4, 1.0, 3, 0);
    let reference = fixed_steps(&c, &b, &s0, 1.0 / 4096.0, 4096);
    let err = |n: usize| fixed_steps(&c, &b, &s0, 1.0 / n as f64, n).phase_distance(&reference, &b);
    let (coarse, fine) = (err(32), err(64));
    assert!(coarse / fine >= 8.0, "coarse {coarse:e}, fine {fine:e}");
}

#[test]
fn zero_data_stays_zero() {
    let (c, b) = cubic(1.5, 8);
    let tr = integrate(
        &ModalState::zeros(8),
        5.0,
        &c,
        &b,
        &RunOptions::sampled(Sampling::Uniform(0.5)),
    )
    .unwrap();
    assert_eq!(tr.final_time(), 5.0);
    assert!(tr.states.iter().all(|s| s.is_zero()));
    assert!(tr.damping_integral.iter().all(|q| *q == 0.0));
}

#[test]
fn energy_is_nonincreasing_and_balanced() {
    let (c, b) = cubic(1.5, 16);
    let s0 = random_low_mode(&b, 16, 1.0, 0, 0);
    let tr = integrate(&s0, 20.0, &c, &b, &RunOptions::sampled(Sampling::Uniform(0.05))).unwrap();
    let e: Vec<f64> = tr.states.iter().map(|s| energy(s, &c, &b)).collect();
    let slack = 10.0 * (c.tol_abs + c.tol_rel * e[0]);
    assert!(e.windows(2).all(|w| w[1] <= w[0] + slack));
    let r = energy_equality_residual(&tr, &c, &b);
    assert!(r.max_abs <= 1e-8 * r.e0.max(1.0), "{r:?}");
}

#[test]
fn undamped_linear_energy_is_conserved() {
    let c = ProblemConfig::builder(1.5)
        .modes(16)
        .poly(0.0, 0.0, 0.0)
        .damping_off(true)
        .build()
        .unwrap();
    let b = SpectralBasis::new(&c);
    let s0 = random_low_mode(&b, 16, 1.0, 1, 0);
    let e0 = energy(&s0, &c, &b);
    let t_end = 100.0;
    let drift = |tol: f64| {
        let opts = RunOptions::sampled(Sampling::Uniform(1.0)).with_tolerances(tol, tol);
        let tr = integrate(&s0, t_end, &c, &b, &opts).unwrap();
        assert!(tr.damping_integral.iter().all(|q| *q == 0.0));
        tr.states
            .iter()
            .map(|s| (energy(s, &c, &b) - e0).abs())
            .fold(0.0, f64::max)
    };
    // local errors accumulate, so the budget is the tolerance per unit time
    let (coarse, fine) = (drift(1e-10), drift(1e-11));
    assert!(coarse <= 10.0 * 1e-10 * t_end * e0.max(1.0), "drift {coarse:e}");
    assert!(coarse / fine >= 5.0, "drift {coarse:e} vs {fine:e}");
}

#[test]
fn rhs_matches_hand_computation() {
    let p = 1.5;
    let (c, b) = cubic(p, 4);
    let s = first_mode(4, 0.3, 0.2);
    let r = rhs_full(&s, &c, &b);
    let grad_sq = PI * PI * 0.09;
    let damping = grad_sq.powf(0.5 * p) + 0.04f64.powf(0.5 * p);
    // e₁³ = (3/2)e₁ − (1/2)e₃ for e_k = √2 sin(kπx)
    let f1 = 1.5 * 0.027;
    let f3 = -0.5 * 0.027;
    assert!((r.a[0] - 0.2).abs() < 1e-15);
    assert!(r.a[1..].iter().all(|x| *x == 0.0));
    assert!(
        (r.b[0] - (-PI * PI * 0.3 - damping * 0.2 - f1)).abs() < 1e-13,
        "{}",
        r.b[0]
    );
    assert!(r.b[1].abs() < 1e-14);
    assert!((r.b[2] + f3).abs() < 1e-14, "{}", r.b[2]);
    assert!(r.b[3].abs() < 1e-14);
}

#[test]
fn decomposition_reconstructs_and_v_energy_decreases() {
    let (c, b) = cubic(1.5, 16);
    let s0 = random_low_mode(&b, 8, 1.0, 2, 0);
    let shift = c.fprime0();
    let run = integrate_decomposition(&s0, shift, 10.0, &c, &b, &RunOptions::sampled(Sampling::Uniform(0.05))).unwrap();
    assert!(
        run.reconstruction_defect(&b) <= 1e-6,
        "{}",
        run.reconstruction_defect(&b)
    );
    let iv = run.shifted_energy_v(&b);
    assert!(iv.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    assert!(run.w.states[0].is_zero());
}

#[test]
fn decomposition_of_zero_is_zero() {
    let (c, b) = cubic(1.5, 8);
    let z = ModalState::zeros(8);
    let run = integrate_decomposition(&z, 0.0, 2.0, &c, &b, &RunOptions::default()).unwrap();
    assert!(run.v.states.iter().chain(&run.w.states).all(|s| s.is_zero()));
}

#[test]
fn linearization_at_rest_conserves_lambda() {
    let (c, b) = cubic(1.5, 16);
    let dir = random_direction(&b, 8, 4, 0);
    let run = integrate_linearized(
        &ModalState::zeros(16),
        &dir,
        20.0,
        &c,
        &b,
        &RunOptions::sampled(Sampling::Uniform(0.5)),
    )
    .unwrap();
    let eps = lambda_u_default_eps(c.p);
    let l: Vec<f64> = run
        .u
        .states
        .iter()
        .zip(&run.tangent.states)
        .map(|(u, v)| lambda_u(u, v, eps, &c, &b))
        .collect();
    assert!(
        l.iter().all(|x| (x - l[0]).abs() <= 1e-8 * l[0]),
        "{:?}",
        (l[0], l.last())
    );
}

#[test]
fn zero_direction_gives_zero_tangent() {
    let (c, b) = cubic(1.5, 8);
    let u0 = random_low_mode(&b, 4, 1.0, 5, 0);
    let run = integrate_linearized(&u0, &ModalState::zeros(8), 2.0, &c, &b, &RunOptions::default()).unwrap();
    assert!(run.tangent.states.iter().all(|s| s.is_zero()));
    let vw = integrate_vw(&u0, &ModalState::zeros(8), 2.0, &c, &b, &RunOptions::default()).unwrap();
    assert!(vw.v.states.iter().chain(&vw.w.states).all(|s| s.is_zero()));
}

#[test]
fn vw_split_reproduces_tangent() {
    let (c, b) = cubic(1.5, 16);
    let u0 = random_low_mode(&b, 8, 1.0, 6, 0);
    let dir = random_direction(&b, 8, 6, 1);
    let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
    let opts = RunOptions::sampled(Sampling::Times(times));
    let lin = integrate_linearized(&u0, &dir, 10.0, &c, &b, &opts).unwrap();
    let vw = integrate_vw(&u0, &dir, 10.0, &c, &b, &opts).unwrap();
    assert_eq!(lin.tangent.times, vw.v.times);
    let d = vw.reconstruction_defect(&lin.tangent, &b);
    assert!(d <= 1e-6, "{d:e}");
}

#[test]
fn linearization_remainder_is_superlinear() {
    let (c, b) = cubic(1.5, 8);
    let u0 = random_low_mode(&b, 4, 1.0, 7, 0);
    let dir = random_direction(&b, 4, 7, 1);
    let hs = [1e-2, 1e-3, 1e-4, 1e-5];
    let opts = RunOptions::default().with_tolerances(1e-13, 1e-13).without_step_log();
    let rep = frechet_probe(&u0, &dir, &hs, 2.0, &c, &b, &opts).unwrap();
    assert!(rep.order >= 1.5, "{rep:?}");
    assert!(rep.remainders.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn small_data_long_run_is_tolerance_converged() {
    let (c, b) = cubic(1.5, 8);
    let s0 = first_mode(8, 0.05, 0.0);
    // the state decays to O(1e-3), so the tolerance is scaled down with it
    let opts = RunOptions::sampled(Sampling::Times(vec![1e4])).without_step_log();
    let run = integrate(&s0, 1e4, &c, &b, &opts.clone().with_tolerances(1e-12, 1e-12)).unwrap();
    let tight = integrate(&s0, 1e4, &c, &b, &opts.with_tolerances(1e-13, 1e-13)).unwrap();
    let (x, y) = (run.last().phase_norm(&b), tight.last().phase_norm(&b));
    assert!((x - y).abs() <= 1e-6 * y, "{x} vs {y}");
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    let (c, b) = cubic(1.2, 16);
    let s0 = random_low_mode(&b, 16, 1.0, 9, 0);
    let opts = RunOptions::sampled(Sampling::Uniform(0.1));
    let x = integrate(&s0, 5.0, &c, &b, &opts).unwrap();
    let y = integrate(&s0, 5.0, &c, &b, &opts).unwrap();
    assert_eq!(x, y);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn energy_derivative_equals_dissipation(seed in 0u64..1000, norm in 0.1f64..2.0, p in 1.05f64..1.95) {
        let (c, b) = cubic(p, 8);
        let s = random_low_mode(&b, 8, norm, seed, 0);
        let r = rhs_full(&s, &c, &b);
        let h = 1e-5;
        let de = (energy(&s.add(&r.scaled(h)), &c, &b) - energy(&s.add(&r.scaled(-h)), &c, &b)) / (2.0 * h);
        let dissipation = s.damping_coefficient(p, &b) * s.vel_sq();
        prop_assert!((de + dissipation).abs() <= 1e-6 * (1.0 + dissipation), "{} vs {}", de, -dissipation);
    }
}

#[test]
fn packed_length_matches_field() {
    let (c, b) = cubic(1.5, 8);
    for kind in [
        SystemKind::Full,
        SystemKind::Decomposition,
        SystemKind::Linearized,
        SystemKind::VW,
        SystemKind::FrechetProbe,
    ] {
        let sys = GalerkinSystem::new(kind, &c, &b);
        assert_eq!(sys.len(), degwave::dynamics::packed_len(kind, 8));
    }
}
