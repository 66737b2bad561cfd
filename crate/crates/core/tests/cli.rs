use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn warmdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warmdiff")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &str = "experiment.n = 10\nexperiment.vocab = 8\nexperiment.num_runs = 4\n\
                     warmstart.method = \"token-injection\"\nwarmstart.rho = 0.3\ndecode.remask_enabled = true\n";

#[test]
fn run_prints_metrics_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let (trace, csv) = (dir.path().join("t.jsonl"), dir.path().join("r.csv"));
    let out = warmdiff(&["run", "--config", s(&cfg), "--trace", s(&trace), "--out", s(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let metrics: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(metrics["runs"], 4);
    assert!(metrics["mean_nfe"].as_f64().unwrap() > 0.0);

    let csv = std::fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "grid_id,method,rho,alpha,epsilon,tau,b0,lambda,run,seed,nfe,exact_match,token_acc,capped");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("0,token-injection,0.3,0.6,0,0.9,0.5,0.05,0,0,"));

    let trace = std::fs::read_to_string(trace).unwrap();
    let first: serde_json::Value = serde_json::from_str(trace.lines().next().unwrap()).unwrap();
    assert_eq!(first["config"]["decode"]["k_max"], 20);
    assert_eq!(first["config"]["warmstart"]["rho"], 0.3);
    let headers = trace.lines().filter(|l| l.starts_with("{\"config\"")).count();
    assert_eq!(headers, 4);
    for line in trace.lines().filter(|l| l.starts_with("{\"k\"")) {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["k", "unmasked", "remasked", "masked_after"] {
            assert!(rec.get(key).is_some(), "missing {key} in {line}");
        }
    }
}

#[test]
fn sweep_writes_csv_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "grid.toml", &format!("{SMALL}grid.rho = [0.0, 0.5]\ngrid.tau = [0.5, 0.9]\n"));
    let out = warmdiff(&["sweep", "--grid", s(&cfg)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 4 * 4);
    let grid_ids: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(grid_ids.first(), Some(&"0"));
    assert_eq!(grid_ids.last(), Some(&"3"));
}

#[test]
fn validate_reports_success() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "small.toml", SMALL);
    let out = warmdiff(&["validate", "--config", s(&cfg)]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok: 4 runs"));
}

#[test]
fn config_errors_exit_with_1() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "bad.toml", "decode.tau = 0.9\ndecode.temperature = 1.0\n");
    let out = warmdiff(&["run", "--config", s(&unknown)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("temperature"));

    let range = write(dir.path(), "range.toml", "warmstart.rho = 1.5\n");
    assert_eq!(warmdiff(&["validate", "--config", s(&range)]).status.code(), Some(1));

    let missing = dir.path().join("nope.toml");
    assert_eq!(warmdiff(&["sweep", "--grid", s(&missing)]).status.code(), Some(1));

    let strategy = write(dir.path(), "strategy.toml", "proposer.kind = \"oracle\"\n");
    assert_eq!(warmdiff(&["run", "--config", s(&strategy)]).status.code(), Some(1));
}

#[test]
fn shipped_configs_validate() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["baseline.toml", "lock_in.toml", "markov.toml"] {
        let out = warmdiff(&["validate", "--config", s(&configs.join(name))]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}
