use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use degwave::attractor::{PointCloud, Provenance};
use degwave::{ModalState, ProblemConfig, SpectralBasis};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("degwave-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn degwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_degwave")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn small_config(dir: &Path) -> PathBuf {
    let path = dir.join("small.conf");
    fs::write(&path, "p = 1.5\nn_modes = 4\nf1 = 0\nc3 = 1\nc5 = 0\n").unwrap();
    path
}

#[test]
fn missing_config_exits_2() {
    let dir = scratch("missing-config");
    let out = degwave(&[
        "simulate",
        "--config",
        dir.join("nope.conf").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = scratch("bad-key");
    let conf = dir.join("bad.conf");
    fs::write(&conf, "p = 1.5\nn_modes = 4\nspeed = 3\n").unwrap();
    let out = degwave(&[
        "simulate",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("speed"));
}

#[test]
fn missing_cloud_exits_2() {
    let dir = scratch("missing-cloud");
    let conf = small_config(&dir);
    let out = degwave(&[
        "dimension",
        "--config",
        conf.to_str().unwrap(),
        "--cloud",
        dir.join("cloud.bin").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn simulate_is_deterministic_and_manifested() {
    let dir = scratch("simulate");
    let conf = small_config(&dir);
    let run = |sub: &str| {
        let out_dir = dir.join(sub);
        let out = degwave(&[
            "simulate",
            "--config",
            conf.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--T",
            "5",
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        out_dir
    };
    let (a, b) = (run("a"), run("b"));
    for name in ["trajectory.csv", "energy.json", "manifest.json"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
    let csv = fs::read_to_string(a.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("t,E,I_u,I_up,residual,phase_norm,sobolev_w"));
    assert_eq!(csv.lines().count(), 1 + 101);
    let manifest = json(&a.join("manifest.json"));
    let hash = hex::encode(Sha256::digest(fs::read(a.join("trajectory.csv")).unwrap()));
    assert_eq!(manifest["files"]["trajectory.csv"], Value::String(hash));
    let energy = json(&a.join("energy.json"));
    assert!(energy["relative_residual"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn decompose_fills_the_sobolev_column() {
    let dir = scratch("decompose");
    let conf = small_config(&dir);
    let out = degwave(&[
        "decompose",
        "--config",
        conf.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
        "--T",
        "4",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.split(',').all(|x| x.parse::<f64>().unwrap().is_finite()), "{last}");
    let summary = json(&dir.join("decompose.json"));
    assert!(summary["reconstruction_defect"].as_f64().unwrap() <= 1e-6);
}

#[test]
fn segment_fixture_has_slope_one() {
    let dir = scratch("segment");
    let out = degwave(&["fixture", "segment", "--size", "20000", "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let out = degwave(&[
        "dimension",
        "--points",
        dir.join("points.csv").to_str().unwrap(),
        "--method",
        "grid",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let slope = json(&dir.join("cover.json"))["slope"].as_f64().unwrap();
    assert!((slope - 1.0).abs() <= 0.1, "{slope}");
}

#[test]
fn saturated_point_set_exits_4() {
    let dir = scratch("saturated");
    let pts = dir.join("points.csv");
    fs::write(&pts, "0\n10\n20\n").unwrap();
    let out = degwave(&[
        "dimension",
        "--points",
        pts.to_str().unwrap(),
        "--eps0",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 4);
    assert!(dir.join("cover.json").exists());
}

#[test]
fn cloud_at_the_origin_has_combined_slope_zero() {
    let dir = scratch("origin");
    let conf = small_config(&dir);
    let c = ProblemConfig::load(&conf).unwrap();
    let b = SpectralBasis::new(&c);
    let cloud = PointCloud {
        points: vec![ModalState::zeros(b.len())],
        labels: Vec::new(),
        provenance: Provenance::new(&c, &b, 0.0, 1.0, c.seed),
    };
    let path = dir.join("cloud.bin");
    cloud.write_bin(&mut fs::File::create(&path).unwrap()).unwrap();
    let out = degwave(&[
        "dimension",
        "--config",
        conf.to_str().unwrap(),
        "--cloud",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let cover = json(&dir.join("cover.json"));
    assert_eq!(cover["summary"]["combined"].as_f64(), Some(0.0));
}

#[test]
fn cloud_for_another_config_is_rejected() {
    let dir = scratch("mismatch");
    let conf = small_config(&dir);
    let c = ProblemConfig::load(&conf).unwrap().with_modes(6).unwrap();
    let b = SpectralBasis::new(&c);
    let cloud = PointCloud {
        points: vec![ModalState::zeros(b.len())],
        labels: Vec::new(),
        provenance: Provenance::new(&c, &b, 0.0, 1.0, 0),
    };
    let path = dir.join("cloud.bin");
    cloud.write_bin(&mut fs::File::create(&path).unwrap()).unwrap();
    let out = degwave(&[
        "dimension",
        "--config",
        conf.to_str().unwrap(),
        "--cloud",
        path.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn gronwall_explicit_solution_is_bounded() {
    let dir = scratch("gronwall");
    let input = dir.join("f.csv");
    let mut text = String::from("t,F,phi,psi\n");
    for i in 0..=400 {
        let t = i as f64 * 0.01;
        text.push_str(&format!("{t},{},1,1\n", 1.0 + (-t).exp()));
    }
    fs::write(&input, text).unwrap();
    let out = degwave(&[
        "gronwall",
        "--input",
        input.to_str().unwrap(),
        "--c1",
        "2.000001",
        "--c2",
        "1",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.join("gronwall.json"));
    assert_eq!(report["hypotheses_ok"], Value::Bool(true));
    assert_eq!(report["bounded"], Value::Bool(true));
}

#[test]
fn shipped_config_reproduces_the_golden_decay_csv() {
    let dir = scratch("golden");
    let out = degwave(&[
        "decay",
        "--config",
        root().join("configs/cubic.conf").to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let hash = hex::encode(Sha256::digest(fs::read(dir.join("decay.csv")).unwrap()));
    let golden = fs::read_to_string(root().join("golden/decay-cubic.sha256")).unwrap();
    assert_eq!(hash, golden.trim());
    let manifest = json(&dir.join("manifest.json"));
    assert_eq!(manifest["files"]["decay.csv"], Value::String(hash));
}
