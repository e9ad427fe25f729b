use std::fs;
use std::path::Path;
use std::process::Command;

use isac_cli::*;

fn small(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.output_dir = dir.to_path_buf();
    cfg.eta1_grid = vec![0.0, 1.0];
    cfg.eta2_grid = vec![0.0, 0.5, 1.0];
    cfg.mc = McSizes { n_symbols: 20_000, n_trials: 400 };
    cfg
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

#[test]
fn constellation_square_and_rim() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.scenario.mod_order = 4;
    let files = cmd_constellation(&cfg).unwrap();
    assert!(dir.path().join("constellation_eta1_0.json").exists());
    assert!(dir.path().join("constellation_eta1_1.json").exists());
    assert!(dir.path().join("config.json").exists());
    let summary = dir.path().join("constellation_summary.csv");
    assert!(files.contains(&summary));
    let text = fs::read_to_string(&summary).unwrap();
    assert!(text.starts_with("eta1,min_distance,avg_power,kld_new\n"));
    assert!(!text.contains('\r'));
    let rows = read_csv(&summary);
    let md: f64 = rows[0][1].parse().unwrap();
    let pw: f64 = rows[1][2].parse().unwrap();
    assert!((md - 2.0).abs() <= 0.01, "{md}");
    assert!((pw - 1.0).abs() <= 0.001, "{pw}");

    let first = fs::read(&summary).unwrap();
    cmd_constellation(&cfg).unwrap();
    assert_eq!(first, fs::read(&summary).unwrap());
}

#[test]
fn empty_grid_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.eta1_grid.clear();
    assert_eq!(cmd_constellation(&cfg).unwrap_err().to_string(), "empty grid");
}

#[test]
fn zero_trials_fail_before_any_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never");
    let mut cfg = small(&out);
    cfg.mc.n_trials = 0;
    assert!(cmd_tradeoff(&cfg).is_err());
    assert!(!out.exists());
}

#[test]
fn single_eta2_gives_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.constellation_source = ConstellationSource::Psk {};
    cfg.baselines.clear();
    cfg.eta2_grid = vec![0.4];
    cmd_pareto(&cfg).unwrap();
    assert_eq!(read_csv(&dir.path().join("pareto.csv")).len(), 1);
}

#[test]
fn tradeoff_rows_move_with_eta2() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.eta2_grid = (0..=10).map(|k| k as f64 / 10.0).collect();
    cfg.mc = McSizes { n_symbols: 50_000, n_trials: 1000 };
    let recs = run_tradeoff(&cfg).unwrap();
    for group in recs.chunks(cfg.eta2_grid.len()) {
        for w in group.windows(2) {
            assert!(w[1].pd.unwrap() <= w[0].pd.unwrap(), "{w:?}");
            assert!(w[1].ber.unwrap() <= w[0].ber.unwrap(), "{w:?}");
            assert!(w[1].kld_c_bits >= w[0].kld_c_bits);
            assert!(w[1].kld_r_nats <= w[0].kld_r_nats);
        }
    }
    for r in &recs {
        assert!(r.kld_c_bits >= 0.0 && r.kld_r_nats >= 0.0);
        for v in [r.ber, r.ser, r.pd, r.pfa_empirical] {
            assert!((0.0..=1.0).contains(&v.unwrap()));
        }
    }
}

#[test]
fn json_output_and_config_echo() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.format = OutputFormat::Json;
    cfg.constellation_source = ConstellationSource::Qam {};
    cmd_pareto(&cfg).unwrap();
    let recs: Vec<isac_core::TradeoffRecord> =
        serde_json::from_str(&fs::read_to_string(dir.path().join("pareto.json")).unwrap()).unwrap();
    assert_eq!(recs.len(), 6);
    assert_eq!(recs[0].constellation, "qam");
    assert!(recs[0].pd.is_none());
    let echo: ExperimentConfig =
        serde_json::from_str(&fs::read_to_string(dir.path().join("config.json")).unwrap()).unwrap();
    assert_eq!(echo, cfg);
}

#[test]
fn file_source_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    fs::write(&path, isac_core::make_apsk(16, &isac_core::ApskRings::standard(16).unwrap()).unwrap().to_json().unwrap()).unwrap();
    let mut cfg = small(dir.path());
    cfg.constellation_source = ConstellationSource::File { path };
    cfg.baselines.clear();
    let recs = run_pareto(&cfg).unwrap();
    assert!(recs.iter().all(|r| r.constellation == "file"));
    assert!(cmd_validate(&cfg).passed());
}

#[test]
fn validate_flags_points_outside_the_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, r#"{"order": 2, "points": [[1.5, 0.0], [-1.0, 0.0]], "labels": [0, 1]}"#).unwrap();
    let mut cfg = small(dir.path());
    cfg.constellation_source = ConstellationSource::File { path };
    let report = cmd_validate(&cfg);
    assert!(!report.passed());
    let bad: Vec<_> = report.checks.iter().filter(|c| !c.passed()).map(|c| c.name.as_str()).collect();
    assert_eq!(bad, ["constellation_amplitude_0"]);
    assert!((report.checks.iter().find(|c| c.name == bad[0]).unwrap().error - 0.5).abs() < 1e-12);
    assert!(run_pareto(&cfg).is_err());
}

#[test]
fn default_validate_passes_and_lists_every_check() {
    let report = cmd_validate(&ExperimentConfig::default());
    assert!(report.passed(), "{report}");
    let text = report.to_string();
    for c in &report.checks {
        assert!(text.contains(&c.name));
    }
    assert!(text.contains("error="));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_isac");
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"order": 2, "points": [[1.5, 0.0], [-1.0, 0.0]], "labels": [0, 1]}"#).unwrap();
    let cfg_path = dir.path().join("cfg.json");
    fs::write(
        &cfg_path,
        format!(r#"{{"constellation_source": {{"kind": "file", "path": {:?}}}}}"#, bad),
    )
    .unwrap();
    let out = Command::new(bin).args(["validate", "--config"]).arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL constellation_amplitude_0"));

    let out_dir = dir.path().join("run");
    let status = Command::new(bin)
        .args(["pareto", "--threads", "2", "--seed", "5", "--format", "json", "--output"])
        .arg(&out_dir)
        .status()
        .unwrap();
    assert!(status.success());
    let echo: ExperimentConfig =
        serde_json::from_str(&fs::read_to_string(out_dir.join("config.json")).unwrap()).unwrap();
    assert_eq!(echo.scenario.seed, 5);
    assert!(out_dir.join("pareto.json").exists());
}
