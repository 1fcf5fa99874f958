use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scpec() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_scpec"));
    c.env_remove("SCPEC_THREADS");
    c
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    scpec().arg("run").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn bundle(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("bundle.json")).unwrap()).unwrap()
}

const PAIR: &str = r#"
schema = 1
name = "pair"
topology = "pair"
n = 2
ansatz = "full"
depths = [2, 4, 8]
shots = 4000
twirls = 4
seed = 3
tasks = ["learn", "mitigate", "report"]
truth = "asymmetric-pair"
max_depth = 5
"#;

fn ring4(tasks: &str, extra: &str) -> String {
    format!(
        r#"
schema = 1
topology = "ring"
n = 4
ansatz = "ring-local"
depths = [4, 12]
shots = 4000
twirls = 4
seed = 1
tasks = [{tasks}]
truth = "random"
truth_seed = 5
tau_max = 1e-3
density = 0.3
asymmetry = 0.02
spam_max = 0.2
meas_scale = 0.0
{extra}
"#
    )
}

fn ratios(b: &Value, key: &str) -> Vec<(String, f64)> {
    b["instances"][0]["mitigate"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (format!("{}/{}", r["circuit"].as_str().unwrap(), r["observable"].as_str().unwrap()), r[key].as_f64().unwrap()))
        .collect()
}

#[test]
fn pair_exact_shows_odd_depth_bias_only_for_the_inconsistent_model() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pair.toml", PAIR);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &["--exact"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = bundle(&out);
    for (name, r) in ratios(&b, "ratio_consistent") {
        assert!((r - 1.0).abs() < 1e-10, "{name}: {r}");
    }
    let factor = (0.99f64 / 0.95).sqrt();
    for (name, r) in ratios(&b, "ratio_inconsistent") {
        let depth: usize = name["cnot-x".len()..name.find('/').unwrap()].parse().unwrap();
        if depth.is_multiple_of(2) || name.ends_with("/ZI") {
            assert!((r - 1.0).abs() < 1e-10, "{name}: {r}");
        } else {
            assert!((r - factor).abs() < 1e-10 || (r - 1.0 / factor).abs() < 1e-10, "{name}: {r}");
        }
    }
    for f in ["report.txt", "bundle.json", "observables.csv", "gamma.csv", "trace.csv"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn ghz_sweep_bias_grows_with_size_for_the_inconsistent_model() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"
schema = 1
topology = "line"
n = 9
ansatz = "line-local"
depths = [2, 4, 8]
shots = 1
twirls = 1
seed = 0
exact = true
tasks = ["mitigate"]
truth = "pair-ratio"
base = 0.01
ratio = 1.01
spam_prep = 0.002
spam_meas = 0.004
sweep = [3, 5, 7, 9]
"#;
    let cfg = write_config(dir.path(), "ghz.toml", body);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &[]).status.success());
    let b = bundle(&out);
    let inst = b["instances"].as_array().unwrap();
    assert_eq!(inst.len(), 4);
    let bias = |i: &Value, k: &str| (i["mitigate"][0][k].as_f64().unwrap() - 1.0).abs();
    let inc: Vec<f64> = inst.iter().map(|i| bias(i, "ratio_inconsistent")).collect();
    assert!(inc.windows(2).all(|w| w[1] > w[0]), "{inc:?}");
    assert!(inst.iter().all(|i| bias(i, "ratio_consistent") < 1e-3));
    let text = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.contains("== bias by size =="));
}

#[test]
fn sampled_runs_refuse_nonphysical_truth() {
    let dir = tempfile::tempdir().unwrap();
    let body = PAIR.replace("asymmetric-pair", "pair-ratio") + "base = 0.01\nratio = 1.05\n";
    let cfg = write_config(dir.path(), "c.toml", &body);
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(run(&cfg, &dir.path().join("out"), &["--exact"]).status.success());
}

#[test]
fn empty_task_list_gives_a_header_only_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pair.toml", PAIR);
    let out = dir.path().join("out");
    assert!(run(&cfg, &out, &["--tasks", ""]).status.success());
    let text = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.starts_with("scpec report\n"));
    assert!(!text.contains("=="), "{text}");
    assert!(text.contains("tasks     -"));
    let b = bundle(&out);
    assert!(b["instances"][0]["learn"].is_null());
    assert!(!out.join("observables.csv").exists());
}

#[test]
fn fixed_seed_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pair.toml", PAIR);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert!(run(&cfg, &a, &[]).status.success());
    let o = scpec().env("SCPEC_THREADS", "2").arg("run").arg(&cfg).arg("--out").arg(&b).output().unwrap();
    assert!(o.status.success());
    assert!(run(&cfg, &c, &["--seed", "4"]).status.success());
    for f in ["report.txt", "bundle.json", "observables.csv"] {
        let read = |d: &Path| std::fs::read(d.join(f)).unwrap();
        assert_eq!(read(&a), read(&b), "{f}");
        if f != "report.txt" {
            assert_ne!(read(&a), read(&c), "{f}");
        }
    }
}

#[test]
fn gamma_table_orders_the_three_optimizers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ring.toml", &ring4(r#""learn", "gauge-opt", "report""#, ""));
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = bundle(&out);
    let g = &b["instances"][0]["gauge_opt"];
    let rows = g["gamma"].as_array().unwrap();
    let total = rows.iter().find(|r| r["slot"] == "gates").unwrap();
    let get = |k: &str| total[k].as_f64().unwrap();
    assert!(get("gamma_star") <= get("gamma_two_step") + 1e-12);
    assert!(get("gamma_two_step") <= get("gamma_0") + 1e-12);
    assert!(g["residual_star"].as_f64().unwrap() <= g["epsilon"].as_f64().unwrap() + 1e-9);
    let csv = std::fs::read_to_string(out.join("gamma.csv")).unwrap();
    assert!(csv.starts_with("n,slot,gamma_0,gamma_two_step,gamma_star\n"));
    let text = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(text.contains("gamma_0") && text.contains("gamma_two_step") && text.contains("gamma_*"));
}

#[test]
fn infeasible_budget_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "ring.toml", &ring4(r#""gauge-opt""#, "epsilon_factor = 0.5"));
    let o = run(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn invalid_configs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let ring6 = write_config(dir.path(), "r6.toml", &ring4(r#""learn""#, "").replace("n = 4", "n = 6"));
    let o = run(&ring6, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("multiple of four"));

    let pair = write_config(dir.path(), "pair.toml", PAIR);
    assert_eq!(run(&pair, &out, &["--tasks", "learn,gauge-opt"]).status.code(), Some(2));
    assert_eq!(run(&pair, &out, &["--tasks", "dance"]).status.code(), Some(2));
    assert_eq!(run(&dir.path().join("missing.toml"), &out, &[]).status.code(), Some(2));
    let o = scpec().env("SCPEC_THREADS", "zero").arg("run").arg(&pair).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "pair.toml", PAIR);
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = run(&cfg, &blocker.join("out"), &["--tasks", ""]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot write output"));
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    for f in ["pair.toml", "ghz.toml", "ring.toml"] {
        let o = run(&root.join(f), &blocker.join("out"), &["--tasks", ""]);
        // parsing succeeds; the empty run then fails only on the output path
        assert_eq!(o.status.code(), Some(1), "{f}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn ring_staircase_consistent_median_bias_is_lower() {
    let dir = tempfile::tempdir().unwrap();
    let body = ring4(r#""mitigate""#, "").replace("n = 4", "n = 12").replace("depths = [4, 12]", "depths = [4, 12, 24]");
    let cfg = write_config(dir.path(), "ring.toml", &body);
    let out = dir.path().join("out");
    let o = run(&cfg, &out, &["--exact"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let b = bundle(&out);
    let median = |key: &str| {
        let mut v: Vec<f64> = ratios(&b, key).into_iter().map(|(_, r)| (r - 1.0).abs()).collect();
        assert_eq!(v.len(), 12);
        v.sort_by(f64::total_cmp);
        (v[5] + v[6]) / 2.0
    };
    assert!(median("ratio_consistent") < median("ratio_inconsistent"));
}
