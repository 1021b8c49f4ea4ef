//! End-to-end CLI checks: gen -> schedule -> route -> oracle -> sweep, plus
//! the documented exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hybridsched"))
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

#[test]
fn gen_schedule_route_pipeline() {
    let dir = tempdir();
    let spec = dir.join("spec.json");
    write(
        &spec,
        r#"{"n": 8, "n_large": 2, "n_small": 4, "c_large": 0.5, "c_small": 0.2,
           "noise_std": 0.003, "window": 200}"#,
    );
    let demand = dir.join("demand.json");
    let out = bin()
        .args(["gen", "--model", "single", "--spec"])
        .arg(&spec)
        .args(["--seed", "7", "--out"])
        .arg(&demand)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "gen failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    for algo in ["eclipse", "solstice", "bvn"] {
        let sched = dir.join(format!("{algo}.json"));
        let out = bin()
            .args(["schedule", "--algo", algo, "--demand"])
            .arg(&demand)
            .arg("--out")
            .arg(&sched)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{algo} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let parsed: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(&sched).unwrap()).unwrap();
        assert!(parsed["entries"].is_array());
    }

    // matching-value curve of the generated demand
    let curve = dir.join("curve.csv");
    let out = bin()
        .args(["curve", "--demand"])
        .arg(&demand)
        .arg("--out")
        .arg(&curve)
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = std::fs::read_to_string(&curve).unwrap();
    assert!(text.starts_with("alpha,value,eff_util\n"));
    assert!(text.lines().count() > 1);

    // route the eclipse schedule's residual demand
    let paths = dir.join("paths.json");
    let out = bin()
        .args(["route", "--schedule"])
        .arg(dir.join("eclipse.json"))
        .arg("--demand")
        .arg(&demand)
        .args(["--mode", "residual", "--exhaust", "--out"])
        .arg(&paths)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "route failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&paths).unwrap()).unwrap();
    assert!(parsed["assignments"].is_array());
}

#[test]
fn oracle_subcommands_on_tiny_demand() {
    let dir = tempdir();
    let demand = dir.join("demand.json");
    write(
        &demand,
        r#"{"n": 2, "window": 12, "delay": 2, "entries": [[10, 0], [0, 10]]}"#,
    );
    let out = bin()
        .args(["oracle", "direct", "--demand"])
        .arg(&demand)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("optimal direct throughput: 20"));

    let out = bin()
        .args(["oracle", "step", "--demand"])
        .arg(&demand)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha=10"));
}

#[test]
fn sweep_preset_writes_csv() {
    let dir = tempdir();
    let csv = dir.join("out.csv");
    let out = bin()
        .args([
            "sweep",
            "--preset",
            "indirect-load",
            "--trials",
            "2",
            "--out",
        ])
        .arg(&csv)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "sweep failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "sweep_var,sweep_value,algorithm,mean_throughput,std_throughput,trials"
    );
    assert!(lines.count() >= 12); // 6 grid points x 2 algorithms
}

#[test]
fn infeasible_demand_exits_with_code_2() {
    let dir = tempdir();
    let demand = dir.join("demand.json");
    write(
        &demand,
        r#"{"n": 2, "window": 1, "delay": 0, "entries": [[2, 0], [0, 2]]}"#,
    );
    let sched = dir.join("s.json");
    let out = bin()
        .args(["schedule", "--algo", "eclipse", "--demand"])
        .arg(&demand)
        .arg("--out")
        .arg(&sched)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_with_code_1() {
    let dir = tempdir();
    let demand = dir.join("demand.json");
    write(&demand, "not json");
    let out = bin()
        .args(["schedule", "--algo", "eclipse", "--demand"])
        .arg(&demand)
        .arg("--out")
        .arg(dir.join("s.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn tempdir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "hybridsched-smoke-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
