use std::f64::consts::{E, PI};
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn nlperim(args: &[&str]) -> Output {
    nlperim_env(args, &[])
}

fn nlperim_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nlperim"));
    cmd.args(args).env_remove("NLPERIM_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_of(out: &Output) -> Value {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(out)).expect("valid JSON on stdout")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn optimal_stripes_at_one_half() {
    let v = json_of(&nlperim(&["stripes", "--d", "2", "--lambda", "0.5", "--optimal"]));
    let d_opt = v["result"]["d_opt"].as_f64().unwrap();
    let e_s = v["result"]["e_S"].as_f64().unwrap();
    assert!((d_opt - PI / E).abs() < 1e-11, "{d_opt}");
    assert!((e_s + 2.0 * E / PI).abs() < 1e-11, "{e_s}");
    assert_eq!(v["spec"]["command"], "stripes");
}

#[test]
fn stripes_needs_a_mode() {
    assert_eq!(code(&nlperim(&["stripes"])), 2);
    assert_eq!(code(&nlperim(&["stripes", "--optimal", "--width", "1"])), 2);
    let v = json_of(&nlperim(&["stripes", "--lambda", "0.3", "--width", "0.8"]));
    assert!((v["result"]["gap"].as_f64().unwrap() - 0.8 * 0.7 / 0.3).abs() < 1e-10);
}

#[test]
fn phase_csv_columns_and_winner_flip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phase.csv");
    let out = nlperim(&["phase", "--d", "2", "--lattices", "square,triangular", "--lambda-grid", "0.01:0.5:50", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "lambda,e_S,e_B_square,e_B_tri,winner");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows[0][0], "0.01");
    assert_eq!(rows[49][0], "0.5");
    let winner_at = |lambda: f64| {
        rows.iter().find(|r| (r[0].parse::<f64>().unwrap() - lambda).abs() < 1e-12).map(|r| r[4]).unwrap()
    };
    assert!(winner_at(0.05).starts_with("balls"));
    assert_eq!(winner_at(0.5), "stripes");
    for r in &rows {
        for cell in &r[1..4] {
            let digits = cell.trim_start_matches('-').split('e').next().unwrap().replace('.', "");
            assert!(digits.trim_start_matches('0').len() <= 12, "{cell}");
        }
    }
}

#[test]
fn lambda_grid_syntax_is_checked() {
    for bad in ["0.1:0.5", "0.1:0.5:x", "0.1:0.5:0"] {
        assert_eq!(code(&nlperim(&["phase", "--lambda-grid", bad])), 2, "{bad}");
    }
    assert_eq!(code(&nlperim(&["phase", "--lattices", "cubic"])), 2);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["phase", "--lambda-grid", "0.02:0.4:8"];
    let one = nlperim_env(&args, &[("NLPERIM_THREADS", "1")]);
    let four = nlperim_env(&args, &[("NLPERIM_THREADS", "4")]);
    assert_eq!(code(&one), 0);
    assert_eq!(stdout(&one), stdout(&four));
    assert_eq!(code(&nlperim_env(&args, &[("NLPERIM_THREADS", "zero")])), 2);
}

#[test]
fn randomised_commands_require_a_seed() {
    assert_eq!(code(&nlperim(&["anneal", "--steps", "10"])), 2);
    assert_eq!(code(&nlperim(&["energy", "--pattern", "random", "--n", "16"])), 2);
    assert_eq!(code(&nlperim(&["energy", "--pattern", "random", "--n", "16", "--seed", "4"])), 0);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(code(&nlperim(&["stripes", "--optimal", "--bogus"])), 2);
    assert_eq!(code(&nlperim(&["nonsense"])), 2);
    assert_eq!(code(&nlperim(&["stripes", "--optimal", "--lambda", "1.5"])), 2);
    assert_eq!(code(&nlperim(&["balls", "--lambda", "0.95"])), 2);
    assert_eq!(code(&nlperim(&["gamma", "--epsilon", "0.1"])), 2);
}

#[test]
fn divergence_reports_json_and_exits_with_three() {
    let out = nlperim(&["energy", "--pattern", "ball", "--analytic", "--family", "supercritical", "--q", "4", "--epsilon", "0"]);
    assert_eq!(code(&out), 3);
    let diag: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(diag["status"], "divergent");
    assert_eq!(diag["command"], "energy");
    assert!(diag["message"].as_str().unwrap().contains("diverge"));
}

#[test]
fn json_artifacts_re_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["balls", "--lambda", "0.05"],
        vec!["balls", "--lattice", "square", "--lambda", "0.1", "--scale", "2"],
        vec!["energy", "--n", "64", "--pattern", "two-balls", "--radius", "0.8"],
        vec!["gamma", "--analytic", "--format", "json"],
        vec!["davila", "--analytic", "--pattern", "stripes", "--format", "json"],
        vec!["phase", "--lambda-grid", "0.05:0.5:4", "--format", "json"],
        vec!["anneal", "--seed", "9", "--steps", "3000", "--n", "32", "--count", "30"],
    ];
    for (i, args) in cases.iter().enumerate() {
        let first = dir.path().join(format!("a{i}.json"));
        let second = dir.path().join(format!("b{i}.json"));
        let mut a = args.clone();
        a.extend(["--out", first.to_str().unwrap()]);
        assert_eq!(code(&nlperim(&a)), 0, "{args:?}");
        let out = nlperim(&["run", first.to_str().unwrap(), "--out", second.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let (x, y) = (read_json(&first), read_json(&second));
        assert_eq!(x["result"], y["result"], "{args:?}");
        assert_eq!(x["spec"]["parameters"], y["spec"]["parameters"], "{args:?}");
        assert_eq!(x["spec"]["command"], y["spec"]["command"]);
    }
}

#[test]
fn run_spec_defaults_match_flag_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("stripes", vec!["--optimal"], json!({"optimal": true})),
        ("balls", vec![], json!({})),
        ("gamma", vec!["--analytic"], json!({"geometry": {"analytic": true}})),
        ("davila", vec!["--analytic"], json!({"geometry": {"analytic": true}})),
        ("phase", vec!["--lambda-grid", "0.1:0.2:2"], json!({"lambda_grid": "0.1:0.2:2"})),
    ];
    for (command, flags, params) in cases {
        let mut args = vec![command];
        args.extend(flags);
        args.extend(["--format", "json"]);
        let from_flags = json_of(&nlperim(&args));
        let spec = dir.path().join(format!("{command}.json"));
        std::fs::write(&spec, json!({"command": command, "parameters": params, "output": {"format": "json"}}).to_string()).unwrap();
        let from_spec = json_of(&nlperim(&["run", spec.to_str().unwrap()]));
        assert_eq!(from_flags["spec"]["parameters"], from_spec["spec"]["parameters"], "{command}");
        assert_eq!(from_flags["result"], from_spec["result"], "{command}");
    }
}

#[test]
fn run_specs_reject_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        json!({"command": "stripes", "parameters": {"optimal": true, "lamda": 0.5}}),
        json!({"command": "stripes", "parameters": {"optimal": true}, "extra": 1}),
        json!({"command": "energy", "parameters": {"kernel": {"family": "power_cutoff", "eps": 0.1}}}),
        json!({"command": "stripes", "parameters": {"optimal": true}, "output": {"path": null, "fmt": "csv"}}),
        json!({"command": "explode"}),
    ];
    for (i, spec) in bad.iter().enumerate() {
        let path = dir.path().join(format!("bad{i}.json"));
        std::fs::write(&path, spec.to_string()).unwrap();
        assert_eq!(code(&nlperim(&["run", path.to_str().unwrap()])), 2, "{spec}");
    }
}

#[test]
fn anneal_manifest_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    let traj = dir.path().join("traj.csv");
    std::fs::write(
        &manifest,
        json!({
            "d": 2, "ell": 4.0, "n": 32, "init": "random", "count": 40, "seed": 5, "steps": 5000,
            "kernel": {"family": "power_cutoff", "epsilon": 0.25}, "log_interval": 500,
            "trajectory": traj.to_str().unwrap()
        })
        .to_string(),
    )
    .unwrap();
    let m = manifest.to_str().unwrap();
    let a = json_of(&nlperim(&["anneal", "--manifest", m]));
    let b = json_of(&nlperim(&["anneal", "--manifest", m]));
    assert_eq!(a, b);
    assert_eq!(a["result"]["best_config"]["n"], 32);
    assert!(a["result"]["best_energy"].as_f64().unwrap() <= a["result"]["initial_energy"].as_f64().unwrap());
    let csv = std::fs::read_to_string(&traj).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "step,T,energy,best_energy,asymmetry");
    assert_eq!(lines.count(), 10);

    // the best configuration feeds back into `energy`
    let cfg = dir.path().join("best.json");
    std::fs::write(&cfg, a["result"]["best_config"].to_string()).unwrap();
    let e = json_of(&nlperim(&["energy", "--pattern", "file", "--config", cfg.to_str().unwrap(), "--d", "2", "--epsilon", "0.25"]));
    let rel = (e["result"]["energy"].as_f64().unwrap() - a["result"]["best_energy"].as_f64().unwrap()).abs();
    assert!(rel < 1e-9, "{rel}");

    std::fs::write(&manifest, json!({"seed": 1, "temperature": 3}).to_string()).unwrap();
    assert_eq!(code(&nlperim(&["anneal", "--manifest", m])), 2);
}

#[test]
fn verify_passes_and_reports_suites() {
    let out = nlperim(&["verify", "--configurations", "6", "--pairs", "6", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.starts_with("suite,cases,failures,worst_slack\n"));
    for suite in ["autocorrelation", "complement_symmetry", "interaction_nonnegative", "bv_bound", "lower_bound"] {
        let row = text.lines().find(|l| l.starts_with(suite)).unwrap_or_else(|| panic!("{suite} missing"));
        assert_eq!(row.split(',').nth(2), Some("0"), "{row}");
    }
    assert_eq!(code(&nlperim(&["verify", "--epsilon", "-1"])), 2);
}

#[test]
fn help_lists_every_flag() {
    let flags: &[(&str, &[&str])] = &[
        ("energy", &["--d", "--ell", "--n", "--pattern", "--radius", "--width", "--gap", "--distance", "--fraction", "--seed", "--config", "--analytic", "--family", "--epsilon", "--q", "--out", "--format"]),
        ("stripes", &["--d", "--lambda", "--optimal", "--width", "--out", "--format"]),
        ("balls", &["--d", "--lattice", "--lambda", "--scale", "--out", "--format"]),
        ("phase", &["--d", "--lattices", "--lambda-grid", "--out", "--format"]),
        ("gamma", &["--pattern", "--analytic", "--family", "--epsilons", "--out"]),
        ("davila", &["--pattern", "--analytic", "--family", "--epsilons", "--out"]),
        ("anneal", &["--d", "--ell", "--n", "--init", "--count", "--fraction", "--config", "--family", "--epsilon", "--t0", "--t-final", "--cooling", "--steps", "--seed", "--proposal", "--refresh-interval", "--log-interval", "--trajectory", "--manifest", "--out"]),
        ("verify", &["--seed", "--configurations", "--pairs", "--epsilon", "--out", "--format"]),
        ("run", &["--out", "--format"]),
    ];
    for (command, expected) in flags {
        let out = nlperim(&[command, "--help"]);
        assert_eq!(code(&out), 0);
        let help = stdout(&out);
        for flag in *expected {
            assert!(help.contains(&format!("{flag} ")) || help.contains(&format!("{flag}\n")), "{command} {flag}");
        }
    }
}
