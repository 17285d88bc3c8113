use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tmnoise"))
}

fn repo() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn config(name: &str) -> PathBuf {
    repo().join("configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn body(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    body(path).lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn bundled_configs_validate() {
    let mut args = vec!["validate".to_string()];
    for c in ["fig4c.toml", "fig5.toml", "cancellation.toml"] {
        args.push(config(c).display().to_string());
    }
    let out = bin().args(&args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn fig4c_dips_near_the_fundamentals() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--config", config("fig4c.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "dips"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dips = rows(&dir.path().join("dips.csv"));
    assert_eq!(dips.len(), 2);
    for (row, (f0, gamma)) in dips.iter().zip([(226_764.6, 1.44), (231_887.3, 8.8)]) {
        let f: f64 = row[1].parse().unwrap();
        assert!((f - f0).abs() < 3.0 * gamma, "{f}");
    }
    let meta = fs::read_to_string(dir.path().join("dips.meta.csv")).unwrap();
    for key in ["git_describe,", "solver,full", "convention,", "params.mechanical[0].omega_m,", "config.preset,fig4c"] {
        assert!(meta.contains(key), "missing {key}");
    }
}

#[test]
fn spectrum_is_reproducible_and_flags_apply() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = run(&[
            "spectrum", "--preset", "fig5", "--fmin", "226700", "--fmax", "226800", "--points", "101",
            "--port", "r1", "--quadrature", "y", "--solver", "rwa", "--out", d.path().to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let pa = a.path().join("spectrum.csv");
    assert_eq!(body(&pa), body(&b.path().join("spectrum.csv")));
    let text = fs::read_to_string(&pa).unwrap();
    assert!(text.contains("# solver=rwa"));
    assert!(text.contains("# quantity=Y_out[mode=0,mirror=1]"));
    assert!(body(&pa).starts_with("freq_hz,psd_value"));
    let r = rows(&pa);
    assert!(r.len() >= 101);
    assert_eq!(r[0][0].parse::<f64>().unwrap(), 226_700.0);
}

#[test]
fn validation_failures_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["spectrum", "--points", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "schema_version = 1\n[cavity]\nkappa = 1.0\n").unwrap();
    let out = run(&["--config", bad.to_str().unwrap(), "spectrum", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cavity"));

    let out = run(&["--config", "/nonexistent.toml", "spectrum"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cancellation_reports_windows_and_handles_one_membrane() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["--config", config("cancellation.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "cancellation"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = rows(&dir.path().join("cancellation.csv"));
    assert_eq!(summary.len(), 2);
    for r in &summary {
        let f: f64 = r[1].parse().unwrap();
        assert!(f > 366_852.5 && f < 367_338.9, "{f}");
    }

    let single = dir.path().join("single.toml");
    fs::write(
        &single,
        "schema_version = 1\npreset = \"cancellation\"\n[couplings]\npump_hz = [0.2, 0.0]\n[grid]\nfmin_hz = 366600.0\nfmax_hz = 367600.0\n",
    )
    .unwrap();
    let out = run(&["--config", single.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "cancellation"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("cancellation_0.csv")).unwrap();
    assert!(text.contains("# window=absent"));
}

#[test]
fn calibrate_synthetic_and_from_data() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["calibrate", "--preset", "fig4c", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let r = rows(&dir.path().join("calibration.csv"));
    let eps_m: f64 = r[0][4].parse().unwrap();
    assert!((eps_m / 2e6 - 1.0).abs() < 0.01, "{eps_m}");

    let data = dir.path().join("amps.csv");
    fs::write(&data, "v_car,v_sb,v_omega_m\n1.0,2.0,3.0\n2.0,1.0,4.0\n").unwrap();
    let cfg = dir.path().join("cal.toml");
    fs::write(&cfg, "schema_version = 1\n[calibration]\ndata = \"amps.csv\"\n").unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "calibrate", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(rows(&dir.path().join("calibration.csv")).len(), 2);
}

#[test]
fn fit_recovers_synthetic_couplings() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["fit", "--preset", "fig4c", "--starts", "2", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let kv = rows(&dir.path().join("fit.csv"));
    let get = |k: &str| kv.iter().find(|r| r[0] == k).unwrap()[1].parse::<f64>().unwrap();
    assert!((get("g0_0_hz") / 0.13 - 1.0).abs() < 0.03);
    assert!((get("g0_1_hz") / 0.39 - 1.0).abs() < 0.03);
}

#[test]
fn oracle_writes_estimate_expectation_and_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("o.toml");
    fs::write(
        &cfg,
        "schema_version = 1\npreset = \"fig4c\"\n[oracle]\nduration_s = 0.25\nsegment = 16384\nrecord = 100\nseed = 3\n",
    )
    .unwrap();
    let out = run(&["--config", cfg.to_str().unwrap(), "oracle", "--decimate", "10", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let psd = rows(&dir.path().join("oracle_psd.csv"));
    let exp = rows(&dir.path().join("oracle_expected.csv"));
    assert!(!psd.is_empty());
    assert_eq!(psd.len(), exp.len());
    assert_eq!(rows(&dir.path().join("oracle_series.csv")).len(), 10);
}

#[test]
fn acceptance_subset_and_zero_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = run(&["acceptance", "--only", "1,2", "--out", d]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(stdout.lines().filter(|l| l.contains("PASS")).count(), 2);
    assert!(fs::read_to_string(dir.path().join("acceptance.json")).unwrap().contains("\"passed\": true"));

    let out = run(&["acceptance", "--only", "1", "--tolerance-scale", "0", "--out", d]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("calibration-arithmetic"));
}
