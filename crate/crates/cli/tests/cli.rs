use std::path::Path;
use std::process::{Command, Output};

fn toatrack(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_toatrack"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

#[test]
fn run_writes_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, threads) in [(&a, "1"), (&b, "3")] {
        let o = toatrack(
            &[
                "run",
                "a3",
                "--mc-runs",
                "6",
                "--seed",
                "9",
                "--oracle",
                "--init",
                "ols",
                "--threads",
                threads,
                "--out",
            ],
            dir.path(),
        );
        assert!(!o.status.success(), "missing --out value must be rejected");
        let o = toatrack(
            &[
                "run",
                "a3",
                "--mc-runs",
                "6",
                "--seed",
                "9",
                "--oracle",
                "--init",
                "ols",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert!(stdout.contains("A3") && stdout.contains("ONM"));
    }
    for f in [
        "per_step.csv",
        "report.json",
        "ctte.svg",
        "trajectory.svg",
        "manifest.json",
    ] {
        assert!(a.join(f).exists(), "{f}");
    }
    let csv = std::fs::read_to_string(a.join("per_step.csv")).unwrap();
    assert!(csv.starts_with("t,true_1,true_2,ogd_1,ogd_2,onm_1,onm_2,xhat_1,xhat_2,"));
    assert_eq!(
        csv,
        std::fs::read_to_string(b.join("per_step.csv")).unwrap()
    );
    let report = std::fs::read_to_string(a.join("report.json")).unwrap();
    assert!(report.contains("\"init\": \"ols\"") && report.contains("\"root_seed\": 9"));
}

#[test]
fn run_accepts_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("walk.toml");
    std::fs::write(
        &cfg,
        r#"
name = "walk"
T = 30
sensors = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
x1_true = [3.0, 2.0]
methods = ["OGD"]
eta = 0.05
init = "exact"
mc_runs = 3

[trajectory]
kind = "random-walk"
step_scale = 0.01

[noise]
kind = "constant"
level = 0.001
"#,
    )
    .unwrap();
    let o = toatrack(&["run", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/walk/per_step.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,true_1,true_2,ogd_1,ogd_2,err_ogd,ctte_ogd"
    );
    assert_eq!(csv.lines().count(), 31);
}

#[test]
fn errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    let o = toatrack(&["run", "Z9"], dir.path());
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown preset"));
    let o = toatrack(&["run", "missing.toml"], dir.path());
    assert!(!o.status.success());
    let o = toatrack(&["run", "A1", "--init", "warm"], dir.path());
    assert!(!o.status.success());
}

#[test]
fn bench_analyze_and_lemmas() {
    let dir = tempfile::tempdir().unwrap();
    let o = toatrack(&["bench", "C1", "--out", "b"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("b/bench.json").exists());

    let o = toatrack(
        &["analyze", "A1", "--runs-per-sigma", "40", "--out", "an"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("an/analysis.json")).unwrap();
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(json["idealized"]["mode"], "idealized");
    assert!(json["idealized"]["Lambda"].as_f64().unwrap() > 0.06);
    assert!(json["scaling"]["fit"]["K1_hat"].as_f64().unwrap() > 0.0);

    let o = toatrack(&["lemmas", "--seed", "4"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("unit_violations"));
}
