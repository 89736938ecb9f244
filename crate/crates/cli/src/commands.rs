use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use degwave::attractor::{
    diameter, ensemble, probe_absorbing_radius, sample_attractor, AbsorbingOptions, AbsorbingReport, EnsembleSpec,
    PointCloud, SampleOptions,
};
use degwave::diagnostics::{
    energy_equality_residual, energy_reports, fit_rate_signature, gronwall_bound_check, lambda_u, lambda_u_default_eps,
    log_spaced, probe_decay_radius, small_data_decay, smooth_norm_sq, w_weighted_energy_check, write_decay_csv,
    write_energy_csv, DecayRadius, GronwallReport, RadiusProbeOptions, RateSignature, ResidualReport, TwoSidedDecay,
    WeightedEnergyCheck, BETA,
};
use degwave::dimension::degenerate::{
    degenerate_cover, measure_inflation, DegenerateCover, DegenerateOptions, InflationProbe, TwoRegimeSummary,
};
use degwave::dimension::vw::{probe_vw_threshold, VwProbe};
use degwave::dimension::{
    box_dimension, fixtures, vw_splitting_report, CoverMethod, CoveringReport, VwOptions, VwReport,
};
use degwave::dynamics::{integrate, integrate_decomposition, integrate_linearized_observed, RunOptions, Sampling};
use degwave::initial::{random_direction, random_low_mode};
use degwave::{ModalState, ProblemConfig, SpectralBasis};

use crate::error::CliError;
use crate::output::OutDir;
use crate::{
    DecayArgs, DimensionArgs, FixtureArgs, FixtureKind, Global, GronwallArgs, LinearizeArgs, Method, SampleArgs,
    SimulateArgs, VwArgs,
};

/// Scale ratio of the annulus report in the two-regime pipeline.
const ANNULUS_ALPHA: f64 = 0.8;

fn load_config(g: &Global) -> Result<(ProblemConfig, SpectralBasis), CliError> {
    let path = g
        .config
        .as_ref()
        .ok_or_else(|| CliError::Input("--config is required".into()))?;
    let mut c = ProblemConfig::load(path)?;
    if let Some(n) = g.modes {
        c = c.with_modes(n)?;
    }
    if let Some(seed) = g.seed {
        c.seed = seed;
    }
    let b = SpectralBasis::new(&c);
    Ok((c, b))
}

fn positive(name: &str, x: f64) -> Result<f64, CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::Input(format!("{name} must be positive, got {x}")))
    }
}

fn horizon(g: &Global, default: f64) -> Result<f64, CliError> {
    positive("--T", g.horizon.unwrap_or(default))
}

fn initial_state(b: &SpectralBasis, n_low: usize, norm: f64, seed: u64) -> Result<ModalState, CliError> {
    if n_low == 0 || !(norm >= 0.0) {
        return Err(CliError::Input("need --n-low ≥ 1 and --norm ≥ 0".into()));
    }
    Ok(random_low_mode(b, n_low.min(b.len()), norm, seed, 0))
}

fn read_cloud(path: &Path, c: &ProblemConfig) -> Result<PointCloud, CliError> {
    let mut f = fs::File::open(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let cloud = PointCloud::read_bin(&mut f)?;
    cloud.check_config(c)?;
    Ok(cloud)
}

fn csv_bytes(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    Ok(buf)
}

fn decay_radius(c: &ProblemConfig, b: &SpectralBasis) -> Result<(f64, DecayRadius), CliError> {
    let probe = probe_decay_radius(
        c,
        b,
        &RadiusProbeOptions {
            seed: c.seed,
            ..Default::default()
        },
    )?;
    let r0 = probe
        .r0
        .ok_or_else(|| CliError::Input("no rung of the decay-radius ladder was accepted".into()))?;
    Ok((r0, probe))
}

#[derive(Serialize)]
struct EnergySummary {
    horizon: f64,
    norm0: f64,
    #[serde(rename = "E0")]
    e0: f64,
    #[serde(rename = "E_final")]
    e_final: f64,
    residual: ResidualReport,
    /// `max |residual| / max(1, E0)`.
    relative_residual: f64,
    n_samples: usize,
}

pub fn simulate(g: &Global, a: &SimulateArgs) -> Result<(), CliError> {
    let (c, b) = load_config(g)?;
    let t_end = horizon(g, 50.0)?;
    let s0 = initial_state(&b, a.n_low, a.norm, c.seed)?;
    let opts = RunOptions::sampled(Sampling::Uniform(positive("--dt", a.dt)?)).without_step_log();
    let tr = integrate(&s0, t_end, &c, &b, &opts)?;
    let reports = energy_reports(&tr, 0.0, &c, &b);
    let residual = energy_equality_residual(&tr, &c, &b);
    let mut out = OutDir::create(&g.out)?;
    out.write("trajectory.csv", &csv_bytes(|w| write_energy_csv(w, &reports, None))?)?;
    out.write_json(
        "energy.json",
        &EnergySummary {
            horizon: t_end,
            norm0: a.norm,
            e0: residual.e0,
            e_final: reports.last().map_or(residual.e0, |r| r.e),
            residual,
            relative_residual: residual.max_abs / residual.e0.max(1.0),
            n_samples: reports.len(),
        },
    )?;
    out.finish(
        "simulate",
        Some(&c.hash_hex()),
        Some(c.seed),
        json!({"T": t_end, "norm": a.norm, "n_low": a.n_low, "dt": a.dt}),
    )
}

#[derive(Serialize)]
struct DecayRunSummary {
    index: usize,
    norm0: f64,
    fit: TwoSidedDecay,
}

#[derive(Serialize)]
struct DecaySummary {
    p: f64,
    expected_exponent: f64,
    r0: f64,
    radius_probe: DecayRadius,
    window: [f64; 2],
    runs: Vec<DecayRunSummary>,
}

pub fn decay(g: &Global, a: &DecayArgs) -> Result<(), CliError> {
    let (c, b) = load_config(g)?;
    let t_end = horizon(g, 1e5)?;
    let window = (t_end / 100.0, t_end);
    if a.runs == 0 {
        return Err(CliError::Input("--runs must be at least 1".into()));
    }
    let (r0, probe) = decay_radius(&c, &b)?;
    let norm0 = positive("--fraction", a.fraction)? * r0;
    let runs: Result<Vec<_>, _> = (0..a.runs)
        .into_par_iter()
        .map(|i| small_data_decay(&c, &b, norm0, t_end, window, a.n_out, c.seed, i as u64))
        .collect();
    let runs = runs?;
    let mut out = OutDir::create(&g.out)?;
    out.write("decay.csv", &csv_bytes(|w| write_decay_csv(w, &runs))?)?;
    out.write_json(
        "decay.json",
        &DecaySummary {
            p: c.p,
            expected_exponent: 1.0 / c.p,
            r0,
            radius_probe: probe,
            window: [window.0, window.1],
            runs: runs
                .iter()
                .enumerate()
                .map(|(index, r)| DecayRunSummary {
                    index,
                    norm0: r.norm0,
                    fit: r.fit,
                })
                .collect(),
        },
    )?;
    out.finish(
        "decay",
        Some(&c.hash_hex()),
        Some(c.seed),
        json!({"T": t_end, "runs": a.runs, "n_out": a.n_out, "fraction": a.fraction}),
    )
}

#[derive(Serialize)]
struct AbsorbingSummary {
    absorbing: AbsorbingReport,
    cloud_points: usize,
    cloud_radius: f64,
    /// Every cloud point lies in `B(0, R(1 + margin))`.
    within_ball: bool,
}

pub fn sample(g: &Global, a: &SampleArgs) -> Result<(), CliError> {
    let (c, b) = load_config(g)?;
    let t_abs = horizon(g, 200.0)?;
    let spec = EnsembleSpec::random(a.members, positive("--radius", a.radius)?, c.seed);
    let starts = ensemble(&b, &spec);
    let absorbing = probe_absorbing_radius(
        &c,
        &b,
        &starts,
        &AbsorbingOptions {
            horizon: t_abs,
            ..Default::default()
        },
    )?;
    let cloud = sample_attractor(&c, &b, &spec, &SampleOptions::new(a.burn_in, a.samples, a.stride))?;
    let cloud_radius = cloud.radius(&b);
    let mut out = OutDir::create(&g.out)?;
    let mut bin = Vec::new();
    cloud.write_bin(&mut bin)?;
    out.write("cloud.bin", &bin)?;
    out.write("cloud.csv", &csv_bytes(|w| cloud.write_csv(w, &b))?)?;
    out.write_json(
        "absorbing.json",
        &AbsorbingSummary {
            within_ball: cloud_radius <= absorbing.radius * (1.0 + absorbing.margin),
            absorbing,
            cloud_points: cloud.len(),
            cloud_radius,
        },
    )?;
    out.finish(
        "sample",
        Some(&c.hash_hex()),
        Some(c.seed),
        json!({
            "T": t_abs, "members": a.members, "radius": a.radius,
            "burn_in": a.burn_in, "samples": a.samples, "stride": a.stride
        }),
    )
}

fn cover_method(m: Method) -> CoverMethod {
    match m {
        Method::Greedy => CoverMethod::Greedy,
        Method::Grid => CoverMethod::Grid,
    }
}

/// Reads one comma-separated point per line; blank lines, `#` comments and a
/// non-numeric header line are skipped.
fn read_points(path: &Path) -> Result<Vec<Vec<f64>>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut points = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match row {
            Ok(row) => points.push(row),
            Err(_) if points.is_empty() && i == 0 => continue,
            Err(e) => return Err(CliError::Input(format!("{}:{}: {e}", path.display(), i + 1))),
        }
    }
    Ok(points)
}

#[derive(Serialize)]
struct CloudDimension {
    r0: f64,
    eps0: f64,
    eps1: f64,
    n_points: usize,
    n_outer: usize,
    outer: Option<CoveringReport>,
    decay_fit: Option<TwoSidedDecay>,
    inflation: Option<InflationProbe>,
    degenerate: Option<DegenerateCover>,
    summary: Option<TwoRegimeSummary>,
}

pub fn dimension(g: &Global, a: &DimensionArgs) -> Result<(), CliError> {
    let method = cover_method(a.method);
    let alpha = g.alpha.unwrap_or(0.5);
    match (&a.cloud, &a.points) {
        (None, Some(path)) => {
            let pts = read_points(path)?;
            let d = if pts.is_empty() { 0.0 } else { diameter(&pts) };
            let eps0 = g.eps0.unwrap_or(if d > 0.0 { d } else { 1.0 });
            let report = box_dimension(&pts, eps0, alpha, a.m_max, method)?;
            let mut out = OutDir::create(&g.out)?;
            out.write_json("cover.json", &report)?;
            out.write("cover.csv", &csv_bytes(|w| report.write_csv(w))?)?;
            out.finish(
                "dimension",
                None,
                None,
                json!({"points": path, "eps0": eps0, "alpha": alpha, "m_max": a.m_max, "method": method}),
            )?;
            match report.slope {
                Some(_) => Ok(()),
                None => Err(CliError::NoWindow(format!("{}", path.display()))),
            }
        }
        (Some(path), None) => cloud_dimension(g, a, path, method, alpha),
        _ => Err(CliError::Input("give exactly one of --cloud or --points".into())),
    }
}

fn cloud_dimension(
    g: &Global,
    a: &DimensionArgs,
    path: &Path,
    method: CoverMethod,
    alpha: f64,
) -> Result<(), CliError> {
    let (c, b) = load_config(g)?;
    let cloud = read_cloud(path, &c)?;
    if cloud.is_empty() {
        return Err(CliError::Input(format!("{}: empty cloud", path.display())));
    }
    let (r0, _) = decay_radius(&c, &b)?;
    let norms: Vec<f64> = cloud.points.iter().map(|s| s.phase_norm(&b)).collect();
    let eps0 = match g.eps0 {
        Some(e) => positive("--eps0", e)?,
        None => norms.iter().copied().filter(|r| *r <= r0).fold(0.0, f64::max),
    };
    let eps1 = 0.5 * eps0;
    let outer_pts: Vec<Vec<f64>> = cloud
        .points
        .iter()
        .zip(&norms)
        .filter(|(_, r)| **r > eps0)
        .map(|(s, _)| s.embed(&b))
        .collect();
    let outer_report = if outer_pts.is_empty() {
        None
    } else {
        let d = diameter(&outer_pts);
        Some(box_dimension(
            &outer_pts,
            if d > 0.0 { d } else { 1.0 },
            alpha,
            a.m_max,
            method,
        )?)
    };
    let n_annulus = norms.iter().filter(|r| **r > eps1 && **r <= eps0).count();

    let mut decay_fit = None;
    let mut inflation = None;
    let mut degenerate = None;
    if n_annulus > 0 {
        let t_end = horizon(g, 1e4)?;
        let run = small_data_decay(&c, &b, 0.1 * r0, t_end, (t_end / 100.0, t_end), 600, c.seed, 0)?;
        let probe = measure_inflation(&c, &b, 0.8 * r0, c.seed)?;
        let infl = probe
            .inflation
            .ok_or_else(|| CliError::Input("time-Hölder fit of the inflation probe has no slope".into()))?;
        let opts = DegenerateOptions {
            m_max: a.m_inner,
            method,
            alpha: ANNULUS_ALPHA,
            ..Default::default()
        };
        degenerate = Some(degenerate_cover(
            &cloud.points,
            eps0,
            eps1,
            &run.fit.upper,
            infl,
            &c,
            &b,
            &opts,
        )?);
        decay_fit = Some(run.fit);
        inflation = Some(probe);
    }
    let outer_slope = match &outer_report {
        None => Some(0.0),
        Some(r) => r.slope,
    };
    let summary = match (outer_slope, &degenerate) {
        (Some(o), Some(cover)) => TwoRegimeSummary::from_reports(o, cover),
        // no annulus: the inner region is the single ball at the origin
        (Some(o), None) => Some(TwoRegimeSummary::without_annulus(o, f64::NAN)),
        (None, _) => None,
    };
    let result = CloudDimension {
        r0,
        eps0,
        eps1,
        n_points: cloud.len(),
        n_outer: outer_pts.len(),
        outer: outer_report,
        decay_fit,
        inflation,
        degenerate,
        summary,
    };
    let mut out = OutDir::create(&g.out)?;
    out.write_json("cover.json", &result)?;
    let table = match &result.outer {
        Some(r) => csv_bytes(|w| r.write_csv(w))?,
        None => b"m,eps,count,t_m\n".to_vec(),
    };
    out.write("cover.csv", &table)?;
    if let Some(cover) = &result.degenerate {
        out.write("degenerate.csv", &csv_bytes(|w| cover.report.write_csv(w))?)?;
    }
    out.finish(
        "dimension",
        Some(&c.hash_hex()),
        Some(c.seed),
        json!({"cloud": path, "eps0": eps0, "alpha": alpha, "m_max": a.m_max, "m_inner": a.m_inner, "method": method}),
    )?;
    match result.summary {
        Some(_) => Ok(()),
        None => Err(CliError::NoWindow(format!(
            "{}: outer or annulus cover has no scaling window",
            path.display()
        ))),
    }
}

#[derive(Serialize)]
struct DecomposeSummary {
    shift: f64,
    /// `sup_t ‖u − v − w‖ / sup_t ‖u‖`.
    reconstruction_defect: f64,
    /// Largest increase of `Ĩ_v` between output times, relative to `Ĩ_v(0)`.
    max_v_increase: f64,
    /// `sup_t ‖w‖²_{H^{1+β}} + ‖w_t‖²_{H^β}`.
    w_sup: f64,
    beta: f64,
    weighted_energy: Option<WeightedEnergyCheck>,
    weighted_energy_error: Option<String>,
}

pub fn decompose(g: &Global, a: &SimulateArgs) -> Result<(), CliError> {
    let (c, b) = load_config(g)?;
    let t_end = horizon(g, 50.0)?;
    let s0 = initial_state(&b, a.n_low, a.norm, c.seed)?;
    let opts = RunOptions::sampled(Sampling::Uniform(positive("--dt", a.dt)?)).without_step_log();
    let run = integrate_decomposition(&s0, c.fprime0(), t_end, &c, &b, &opts)?;
    let reports = energy_reports(&run.u, 0.0, &c, &b);
    let sw: Vec<f64> = run.w.states.iter().map(|w| smooth_norm_sq(w, BETA, &b)).collect();
    let iv = run.shifted_energy_v(&b);
    let max_v_increase = if iv[0] > 0.0 {
        iv.windows(2).map(|w| (w[1] - w[0]) / iv[0]).fold(0.0, f64::max)
    } else {
        0.0
    };
    let (weighted_energy, weighted_energy_error) =
        match w_weighted_energy_check(&run, lambda_u_default_eps(c.p), &c, &b) {
            Ok(w) => (Some(w), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let mut out = OutDir::create(&g.out)?;
    out.write(
        "trajectory.csv",
        &csv_bytes(|w| write_energy_csv(w, &reports, Some(&sw)))?,
    )?;
    out.write_json(
        "decompose.json",
        &DecomposeSummary {
            shift: run.shift,
            reconstruction_defect: run.reconstruction_defect(&b),
            max_v_increase,
            w_sup: sw.iter().copied().fold(0.0, f64::max),
            beta: BETA,
            weighted_energy,
            weighted_energy_error,
        },
    )?;
    out.finish(
        "decompose",
        Some(&c.hash_hex()),
        Some(c.seed),
        json!({"T": t_end, "norm": a.norm, "n_low": a.n_low, "dt": a.dt}),
    )
}

#[derive(Serialize)]
struct LinearizeSummary {
    eps: f64,
    #[serde(rename = "Lambda0")]
    lambda0: f64,
    /// Largest increase of `Λ_U` between accepted steps, relative to `Λ_U(0)`.
    max_step_increase: f64,
    rate_signature: Option<RateSignature>,
}

pub fn linearize(g: &Global, a: &LinearizeArgs) -> Result<(), CliError> {
    let (c, b) = load_config(g)?;
    let t_end = horizon(g, 100.0)?;
    let n = b.len();
    let u0 = initial_state(&b, 4, a.norm, c.seed)?;
    let dir = random_direction(&b, 8.min(n), c.seed, 1);
    let eps = lambda_u_default_eps(c.p);
    if a.n_out < 2 || t_end <= 0.1 {
        return Err(CliError::Input("need --n-out ≥ 2 and --T > 0.1".into()));
    }
    let opts = RunOptions::sampled(Sampling::Times(log_spaced(0.1, t_end, a.n_out))).without_step_log();
    let lambda0 = lambda_u(&u0, &dir, eps, &c, &b);
    let mut prev = lambda0;
    let mut increase: f64 = 0.0;
    let run = integrate_linearized_observed(&u0, &dir, t_end, &c, &b, &opts, &mut |_, y| {
        let cur = lambda_u(
            &ModalState::from_packed(&y[..2 * n]),
            &ModalState::from_packed(&y[2 * n..4 * n]),
            eps,
            &c,
            &b,
        );
        increase = increase.max((cur - prev) / lambda0);
        prev = cur;
    })?;
    let lam: Vec<f64> = run
        .u
        .states
        .iter()
        .zip(&run.tangent.states)
        .map(|(u, v)| lambda_u(u, v, eps, &c, &b))
        .collect();
    let ratios: Vec<f64> = lam.iter().map(|l| l / lambda0).collect();
    let mut out = OutDir::create(&g.out)?;
    let table = csv_bytes(|w| {
        use std::io::Write;
        writeln!(w, "t,phase_norm_u,phase_norm_U,Lambda_U")?;
        for (((t, u), v), l) in run.u.times.iter().zip(&run.u.states).zip(&run.tangent.states).zip(&lam) {
            writeln!(
                w,
                "{t:.16e},{:.16e},{:.16e},{l:.16e}",
                u.phase_norm(&b),
                v.phase_norm(&b)
            )?;
        }
        Ok(())
    })?;
    out.write("linearized.csv", &table)?;
    out.write_json(
        "linearize.json",
        &LinearizeSummary {
            eps,
            lambda0,
            max_step_increase: increase,
            rate_signature: fit_rate_signature(&run.u.times, &ratios, c.p, u0.i_u(&b)),
        },
    )?;
    out.finish(
        "linearize",
        Some(&c.hash_hex()),
        Some(c.seed),
        json!({"T": t_end, "norm": a.norm, "n_out": a.n_out}),
    )
}

#[derive(Serialize)]
#[serde(untagged)]
enum VwOutput {
    Cloud(VwProbe),
    UnitBall(VwReport),
}

pub fn vw_report(g: &Global, a: &VwArgs) -> Result<(), CliError> {
    let (c, b) = load_config(g)?;
    let opts = VwOptions {
        n_dirs: a.dirs,
        levels: a.levels,
        ..Default::default()
    };
    let result = match &a.cloud {
        Some(path) => {
            let cloud = read_cloud(path, &c)?;
            let eps_max = positive("--eps0", g.eps0.unwrap_or(0.5))?;
            if a.rungs == 0 {
                return Err(CliError::Input("--rungs must be at least 1".into()));
            }
            VwOutput::Cloud(probe_vw_threshold(
                &c,
                &b,
                &cloud.points,
                a.samples,
                eps_max,
                a.rungs,
                &opts,
            )?)
        }
        None => {
            let starts = ensemble(&b, &EnsembleSpec::random(a.samples, 1.0, c.seed));
            let eps0 = g.eps0.unwrap_or(1e-9);
            VwOutput::UnitBall(vw_splitting_report(&c, &b, &starts, &VwOptions { eps0, ..opts })?)
        }
    };
    let mut out = OutDir::create(&g.out)?;
    out.write_json("vw.json", &result)?;
    out.finish(
        "vw-report",
        Some(&c.hash_hex()),
        Some(c.seed),
        json!({"cloud": a.cloud, "samples": a.samples, "dirs": a.dirs, "rungs": a.rungs, "levels": a.levels}),
    )
}

fn read_gronwall_csv(path: &Path) -> Result<[Vec<f64>; 4], CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').map(str::trim).collect();
    if header != ["t", "F", "phi", "psi"] {
        return Err(CliError::Input(format!(
            "{}: expected header `t,F,phi,psi`",
            path.display()
        )));
    }
    let mut cols: [Vec<f64>; 4] = Default::default();
    for (i, line) in lines.enumerate() {
        let row: Result<Vec<f64>, _> = line.split(',').map(|x| x.trim().parse::<f64>()).collect();
        match row {
            Ok(row) if row.len() == 4 => {
                for (col, x) in cols.iter_mut().zip(row) {
                    col.push(x);
                }
            }
            _ => return Err(CliError::Input(format!("{}: bad row {}", path.display(), i + 2))),
        }
    }
    Ok(cols)
}

pub fn gronwall(g: &Global, a: &GronwallArgs) -> Result<(), CliError> {
    let [t, f, phi, psi] = read_gronwall_csv(&a.input)?;
    let report: GronwallReport = gronwall_bound_check(&t, &f, &phi, &psi, a.c1, a.c2, a.slack)?;
    let mut out = OutDir::create(&g.out)?;
    out.write_json("gronwall.json", &report)?;
    out.finish(
        "gronwall",
        None,
        None,
        json!({"input": a.input, "c1": a.c1, "c2": a.c2, "slack": a.slack}),
    )
}

pub fn fixture(g: &Global, a: &FixtureArgs) -> Result<(), CliError> {
    let seed = g.seed.unwrap_or(0);
    let pts = match a.kind {
        FixtureKind::Segment => fixtures::segment(a.size, seed),
        FixtureKind::Square => fixtures::square(a.size),
        FixtureKind::Cantor if a.size <= 16 => fixtures::cantor_dust(a.size as u32),
        FixtureKind::Cantor => {
            return Err(CliError::Input(format!(
                "Cantor depth must be at most 16, got {}",
                a.size
            )));
        }
    };
    let table = csv_bytes(|w| {
        use std::io::Write;
        for p in &pts {
            let row: Vec<String> = p.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    })?;
    let mut out = OutDir::create(&g.out)?;
    out.write("points.csv", &table)?;
    out.finish(
        "fixture",
        None,
        Some(seed),
        json!({"kind": format!("{:?}", a.kind).to_lowercase(), "size": a.size}),
    )
}
