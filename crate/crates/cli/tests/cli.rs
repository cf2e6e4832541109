use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use osc_povm::analysis::{event_distribution, statistical_distance, ComparisonModel, ComparisonSpec};
use osc_povm::benchmark::equivalence;
use osc_povm_cli::{parse_config, parse_json, parse_toml, run_scenario, Mode};

fn repo_file(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(name)
}

fn cli(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_osc-povm"));
    cmd.args(args).env_remove("OSC_POVM_THREADS");
    if let Some(n) = threads {
        cmd.env("OSC_POVM_THREADS", n);
    }
    cmd.output().unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn data_rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn shipped_benchmark_config_is_the_benchmark() {
    let cfg = parse_config(&repo_file("configs/benchmark.toml")).unwrap();
    let b = equivalence().unwrap();
    let ph = cfg.physics.unwrap();
    assert_eq!(ph.state, b.state);
    assert_eq!(ph.mixing, b.mixing);
    assert_eq!(ph.channels.len(), 1);
    assert_eq!(ph.channels[0].channel, b.channel);
    assert_eq!(ph.channels[0].weight, 1.0);
    assert_eq!(cfg.geometry.unwrap().baselines, b.baselines);
}

#[test]
fn every_shipped_config_runs() {
    for name in ["benchmark", "toa", "mixed", "channels"] {
        let cfg = parse_config(&repo_file(&format!("configs/{name}.toml"))).unwrap();
        let curves = run_scenario(&cfg, None).unwrap();
        assert!(curves.iter().all(|c| c.y.iter().all(|v| v.is_finite())), "{name}");
    }
}

#[test]
fn benchmark_run_reports_the_fitted_wavenumber() {
    let cfg = parse_config(&repo_file("configs/benchmark.toml")).unwrap();
    let curves = run_scenario(&cfg, None).unwrap();
    let s = &curves[0].meta.scalars;
    assert!((s["k_fit"] / s["k_12"].abs() - 1.0).abs() < 1e-3);
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = repo_file("configs/channels.toml");
    let config = config.to_str().unwrap();
    let mut outputs = Vec::new();
    for (k, threads) in [None, Some("1"), Some("2")].into_iter().enumerate() {
        for ext in ["csv", "json"] {
            let path = dir.path().join(format!("run{k}.{ext}"));
            let out = cli(&["run", "-c", config, "-o", path.to_str().unwrap()], threads);
            assert!(out.status.success());
            outputs.push((ext, std::fs::read(&path).unwrap()));
        }
    }
    for pair in outputs.chunks(2).skip(1) {
        assert_eq!(pair[0].1, outputs[0].1);
        assert_eq!(pair[1].1, outputs[1].1);
    }
    assert_ne!(outputs[0].1, outputs[1].1);
}

#[test]
fn wavelength_subcommand_gives_three_curves() {
    let csv = stdout(&cli(&["run", "wavelength", "--eth", "1.0MeV", "--emax-ratio", "10"], None));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header.split(',').count(), 4);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1000);
    let four_pi = 4.0 * std::f64::consts::PI;
    assert_eq!(rows[0][0], 1.0);
    assert!((rows[0][1] - four_pi).abs() < 1e-15);
    assert!((rows[0][2] - four_pi / 2.0).abs() < 1e-15);
    assert!((rows[0][3] - four_pi).abs() < 1e-12);
    assert!(rows.windows(2).all(|w| w[1][3] < w[0][3]));
    assert!((rows[999][0] - 10.0).abs() < 1e-12);
}

#[test]
fn compare_subcommand_reports_the_distance() {
    let json = stdout(&cli(&["run", "compare", "--alpha", "10", "--format", "json"], None));
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let spec = ComparisonSpec::resolved(10.0, 1.0, 10.0).unwrap();
    let p1 = event_distribution(ComparisonModel::Standard, &spec).unwrap();
    let p2 = event_distribution(ComparisonModel::Qm, &spec).unwrap();
    let d = statistical_distance(&p1, &p2).unwrap();
    assert_eq!(v[0]["meta"]["scalars"]["d12"].as_f64().unwrap(), d);
    assert_eq!(v[1]["meta"]["model"], "qm");
    assert_eq!(v[1]["y"].as_array().unwrap().len(), spec.grid_points);
}

#[test]
fn json_configs_match_toml() {
    let toml_text = std::fs::read_to_string(repo_file("configs/toa.toml")).unwrap();
    let json_text = r#"{"toa": {"mass": "1000 eV", "pbar": "10 eV", "pbar2": "10.01 eV",
        "distance": "1e6 eV^-1", "width": "1e4 eV^-1", "points": 801}, "run": {"mode": "toa"}}"#;
    assert_eq!(parse_json(json_text).unwrap(), parse_toml(&toml_text).unwrap());
}

#[test]
fn toa_run_is_normalized_with_fringes() {
    let cfg = parse_config(&repo_file("configs/toa.toml")).unwrap();
    let curves = run_scenario(&cfg, Some(Mode::Toa)).unwrap();
    let s = &curves[0].meta.scalars;
    assert!((s["total"] - 1.0).abs() < 1e-6);
    assert!(s["omega"] > 0.0);
}

#[test]
fn exit_code_one_lists_every_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo_file("configs/benchmark.toml"))
        .unwrap()
        .replace("\"1.6 eV^-1\"", "\"-1.6 eV^-1\"")
        .replace("\"100 eV^-1\"", "100");
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, text).unwrap();
    for args in [vec!["check", path.to_str().unwrap()], vec!["run", "-c", path.to_str().unwrap()]] {
        let out = cli(&args, None);
        assert_eq!(out.status.code(), Some(1));
        let err = String::from_utf8(out.stderr).unwrap();
        assert!(err.contains("state.sigma: positivity"), "{err}");
        assert!(err.contains("channel[0].delta"), "{err}");
    }
    let out = cli(&["run", "curve"], Some("0"));
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_code_two_for_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(repo_file("configs/benchmark.toml")).unwrap().replace(
        "stop = \"1702.4379540310224 eV^-1\", points = 121",
        "stop = \"300 eV^-1\", points = 21",
    );
    let path = dir.path().join("short.toml");
    std::fs::write(&path, text).unwrap();
    let out = cli(&["run", "-c", path.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_code_three_only_in_strict_mode() {
    let config = repo_file("configs/benchmark.toml");
    let config = config.to_str().unwrap();
    let strict = cli(&["run", "-c", config, "--strict"], None);
    assert_eq!(strict.status.code(), Some(3));
    assert!(strict.stdout.is_empty());
    let permissive = cli(&["run", "-c", config], None);
    assert!(permissive.status.success());
    assert!(String::from_utf8(permissive.stderr).unwrap().contains("warning: dispersion"));
    // the flag travels with the curve
    assert!(String::from_utf8(permissive.stdout).unwrap().starts_with("# closed-general flag: dispersion"));
}
