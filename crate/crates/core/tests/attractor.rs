use degwave::attractor::{
    annulus_split, ensemble, invariance_check, probe_absorbing_radius, sample_attractor, v_decay_report,
    w_regularity_report, AbsorbingOptions, EnsembleSpec, PointCloud, SampleOptions,
};
use degwave::diagnostics::BETA;
use degwave::{ModalState, ProblemConfig, SpectralBasis};

fn double_well(n: usize) -> (ProblemConfig, SpectralBasis) {
    let c = ProblemConfig::builder(1.5)
        .modes(n)
        .poly(-2.0, -40.0, 10.0)
        .build()
        .unwrap();
    let b = SpectralBasis::new(&c);
    (c, b)
}

fn cubic(n: usize) -> (ProblemConfig, SpectralBasis) {
    let c = ProblemConfig::builder(1.5)
        .modes(n)
        .poly(0.0, 1.0, 0.0)
        .build()
        .unwrap();
    let b = SpectralBasis::new(&c);
    (c, b)
}

#[test]
fn absorbing_radius_is_stable_under_doubling_the_ensemble() {
    let (c, b) = double_well(16);
    let opts = AbsorbingOptions {
        horizon: 100.0,
        ..Default::default()
    };
    let small = probe_absorbing_radius(&c, &b, &ensemble(&b, &EnsembleSpec::random(64, 10.0, 0)), &opts).unwrap();
    let large = probe_absorbing_radius(&c, &b, &ensemble(&b, &EnsembleSpec::random(128, 10.0, 0)), &opts).unwrap();
    assert!(small.radius.is_finite() && small.radius > 0.0);
    assert!(
        (small.radius - large.radius).abs() <= 0.1 * large.radius,
        "{} vs {}",
        small.radius,
        large.radius
    );
    assert!(small.settled() && large.settled());
    assert!(small.max_entry_time() < opts.horizon);
}

#[test]
fn sampling_is_deterministic_and_strides_nest() {
    let (c, b) = double_well(8);
    let spec = EnsembleSpec::random(6, 5.0, 3);
    // both runs end at t = 60, so they take identical steps
    let exact = |burn_in, n, stride| SampleOptions {
        dedup_tol: 0.0,
        ..SampleOptions::new(burn_in, n, stride)
    };
    let fine = sample_attractor(&c, &b, &spec, &exact(40.0, 40, 0.5)).unwrap();
    let again = sample_attractor(&c, &b, &spec, &exact(40.0, 40, 0.5)).unwrap();
    assert_eq!(fine, again);
    let coarse = sample_attractor(&c, &b, &spec, &exact(40.0, 20, 1.0)).unwrap();
    assert_eq!(coarse.len(), 6 * 20);
    for (s, label) in coarse.points.iter().zip(&coarse.labels) {
        let k = fine
            .labels
            .iter()
            .position(|l| l.trajectory == label.trajectory && l.t == label.t)
            .expect("coarse sample time missing from the fine run");
        assert_eq!(&fine.points[k], s);
    }
}

#[test]
fn annulus_split_partitions_the_cloud() {
    let (c, b) = double_well(8);
    let cloud = sample_attractor(
        &c,
        &b,
        &EnsembleSpec::random(16, 10.0, 1),
        &SampleOptions::new(30.0, 20, 0.5),
    )
    .unwrap();
    let eps = 1.0;
    let (inner, outer) = annulus_split(&cloud, eps, &b);
    assert_eq!(inner.len() + outer.len(), cloud.len());
    assert!(inner.points.iter().all(|s| s.phase_norm(&b) <= eps));
    assert!(outer.points.iter().all(|s| s.phase_norm(&b) > eps));
    assert!(!inner.is_empty() && !outer.is_empty());
}

#[test]
fn cloud_file_round_trip() {
    let (c, b) = double_well(8);
    let cloud = sample_attractor(
        &c,
        &b,
        &EnsembleSpec::random(4, 5.0, 2),
        &SampleOptions::new(10.0, 5, 1.0),
    )
    .unwrap();
    let path = std::env::temp_dir().join(format!("degwave-cloud-{}.bin", std::process::id()));
    let mut f = std::fs::File::create(&path).unwrap();
    cloud.write_bin(&mut f).unwrap();
    drop(f);
    let back = PointCloud::read_bin(&mut std::fs::File::open(&path).unwrap()).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(back.points, cloud.points);
    assert_eq!(back.provenance, cloud.provenance);
    back.check_config(&c).unwrap();
    let (other, _) = double_well(16);
    assert!(back.check_config(&other).is_err());
}

#[test]
fn w_regularity_sup_is_stable_in_time() {
    let (c, b) = double_well(16);
    let starts = ensemble(&b, &EnsembleSpec::random(8, 5.0, 0));
    let short = w_regularity_report(&c, &b, &starts, 25.0, 0.25, BETA).unwrap();
    let long = w_regularity_report(&c, &b, &starts, 50.0, 0.25, BETA).unwrap();
    assert!(short.sup.is_finite() && short.sup > 0.0);
    assert!(long.sup <= 1.2 * short.sup, "{} vs {}", long.sup, short.sup);
}

#[test]
fn v_part_decays_uniformly_and_monotonically() {
    let (c, b) = cubic(8);
    let starts = ensemble(&b, &EnsembleSpec::random(8, 5.0, 4));
    let r = v_decay_report(&c, &b, &starts, 300.0, 0.5, 1e-4).unwrap();
    assert!(r.uniform_time.is_some(), "{r:?}");
    assert!(r.max_step_increase <= 1e-9, "{}", r.max_step_increase);
    assert!(r.reconstruction <= 1e-6, "{}", r.reconstruction);
    assert_eq!(r.sup_initial, starts.iter().map(|s| s.i_u(&b)).fold(0.0, f64::max));
}

#[test]
fn the_origin_is_invariant() {
    let (c, b) = cubic(8);
    let cloud = PointCloud {
        points: vec![ModalState::zeros(8)],
        labels: Vec::new(),
        provenance: degwave::attractor::Provenance::new(&c, &b, 0.0, 1.0, 0),
    };
    let r = invariance_check(&cloud, 1.0, &c, &b).unwrap();
    assert_eq!(r.hausdorff, 0.0);
    assert_eq!(r.relative(), 0.0);
}
