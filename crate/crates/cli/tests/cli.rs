use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn abi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abi")).args(args).output().expect("run abi")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, body).unwrap();
    p
}

const SMALL: &str = r#"{"schema":"abi-simulate/1","simulation":{"n":8,"length":10.0,"t_end":0.5,"diag_dt":0.25,"seed":3,
  "state":{"tau0":1.0,"b0":[0.2,0.0,0.0],"d0":[0.0,0.1,0.0]}},"output":{"snapshot_every":1}}"#;

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&abi(&[])), 1);
    assert_eq!(code(&abi(&["no-such-command"])), 1);
    assert_eq!(code(&abi(&["projectors", "--xi", "0,0,0"])), 1);
    assert_eq!(code(&abi(&["projectors", "--xi", "1,0,0", "--state", "tau0=-1"])), 1);
    assert_eq!(code(&abi(&["--help"])), 0);
}

#[test]
fn projectors_dump_is_a_resolution_of_the_identity() {
    let o = abi(&["projectors", "--xi", "0.3,-1,2", "--state", "tau0=0.8", "b0=0.2,0,0.1", "d0=0,0.3,0"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let m = |k: &str| -> Vec<Vec<f64>> { serde_json::from_value(v[k].clone()).unwrap() };
    let (p0, pp, pm) = (m("P0"), m("Pplus"), m("Pminus"));
    for i in 0..10 {
        for j in 0..10 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((p0[i][j] + pp[i][j] + pm[i][j] - want).abs() < 1e-12);
        }
    }
    assert!(v["norm0"].as_f64().unwrap() > 0.0);
    assert_eq!(v["layout"], "tau,v,b,d");
}

#[test]
fn identities_pass_by_default_and_fail_an_unreachable_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    assert_eq!(code(&abi(&["check-identities", "--out", out])), 0);
    let report = json(&dir.path().join("identities.json"));
    assert_eq!(report["pass"], true);
    assert_eq!(report["report"]["stats"].as_array().unwrap().len(), 16);
    assert!(dir.path().join("manifest.json").exists());
    assert_eq!(code(&abi(&["check-identities", "--out", out, "--samples", "200", "--tolerance", "1e-30"])), 2);
    let iso = abi(&["check-identities", "--out", out, "--samples", "500", "--state", "tau0=1", "b0=0", "d0=0"]);
    assert_eq!(code(&iso), 0);
}

#[test]
fn verify_symbols_default_run_certifies_all_twelve_tensors() {
    let dir = tempfile::tempdir().unwrap();
    let o = abi(&["verify-symbols", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let c = json(&dir.path().join("certificates.json"));
    assert_eq!(c["all_residues_zero"], true);
    let certs = c["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 12);
    assert!(certs.iter().all(|x| x["entries_nonzero"] == 0));
    let m = json(&dir.path().join("manifest.json"));
    assert_eq!(m["subcommand"], "verify-symbols");
    assert_eq!(m["exit_code"], 0);
}

#[test]
fn mutated_entry_exits_two_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    let o = abi(&[
        "verify-symbols",
        "--kind",
        "n",
        "--interaction",
        "+,-+",
        "--mutate-entry",
        "3,4,5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stdout(&o).contains("witness entry [3, 4, 5]"), "{}", stdout(&o));
    let c = json(&dir.path().join("certificates.json"));
    assert_eq!(c["certificates"][0]["witnesses"][0]["entry"], serde_json::json!([3, 4, 5]));
}

#[test]
fn chaplygin_subsystem_certifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = abi(&["verify-symbols", "--subsystem", "chaplygin", "--cofactors", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let c = json(&dir.path().join("certificates.json"));
    let certs = c["certificates"].as_array().unwrap();
    assert!(certs.iter().filter(|x| x["which"] == "N").all(|x| x["entries_total"] == 64));
    // b, d slots are outside the block
    assert_eq!(
        code(&abi(&[
            "verify-symbols",
            "--subsystem",
            "chaplygin",
            "--mutate-entry",
            "4,4,4",
            "--out",
            dir.path().to_str().unwrap()
        ])),
        1
    );
}

#[test]
fn simulate_writes_series_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let o = abi(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("series.csv")).unwrap();
    assert_eq!(
        csv.lines().next().unwrap(),
        "t,H1_U,H6_U,HN_U,H1_up,H1_um,H1_u0,W1inf_U,B0inf1,B1inf1,res_divb_sup,res_divd_sup,res_rot_sup,man_scalar_sup,man_vector_sup,energy"
    );
    assert_eq!(csv.lines().count(), 4);
    for i in 0..3 {
        let bin = out.join(format!("snapshots/snap_{i:04}.bin"));
        assert_eq!(fs::metadata(&bin).unwrap().len(), 8 * 10 * 512);
        let meta = json(&bin.with_extension("json"));
        assert_eq!(meta["layout"], "tau,v,b,d");
        assert_eq!(meta["N"], 8);
    }
    let m = json(&out.join("manifest.json"));
    assert_eq!(m["config"]["simulation"]["seed"], 3);
    assert_eq!(m["seed"], 3);
    assert!(m["rng"].as_str().unwrap().contains("ChaCha8"));
    assert!(m["finished_unix_ms"].as_u64().unwrap() >= m["started_unix_ms"].as_u64().unwrap());
    assert!(m["outputs"].as_array().unwrap().len() >= 9);
}

#[test]
fn manifest_rerun_reproduces_bitwise_on_one_thread() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let run = |config: &Path, out: &Path| {
        Command::new(env!("CARGO_BIN_EXE_abi"))
            .env("ABI_THREADS", "1")
            .args(["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .status()
            .unwrap()
    };
    assert!(run(&cfg, &a).success());
    assert!(run(&a.join("manifest.json"), &b).success());
    assert_eq!(fs::read(a.join("series.csv")).unwrap(), fs::read(b.join("series.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("snapshots/snap_0002.bin")).unwrap(),
        fs::read(b.join("snapshots/snap_0002.bin")).unwrap()
    );
}

#[test]
fn config_violations_exit_one_and_dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    for bad in [
        r#"{"schema":"abi-simulate/1","simulation":{"n":8,"colour":"red"}}"#,
        r#"{"schema":"abi-simulate/2"}"#,
        r#"{"simulation":{}}"#,
        r#"{"schema":"abi-simulate/1","simulation":{"t_end":1.0,"diag_dt":0.3}}"#,
    ] {
        let cfg = write_config(dir.path(), bad);
        assert_eq!(
            code(&abi(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])),
            1,
            "{bad}"
        );
    }
    let cfg = write_config(dir.path(), SMALL);
    let o = abi(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dry-run"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("\"plan\""));
    assert!(!out.exists());
}

#[test]
fn blow_up_exits_three_and_keeps_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"schema":"abi-simulate/1","simulation":{"n":16,"length":20.0,"t_end":4.0,"diag_dt":0.5,"ic":{"amplitude":5.0}}}"#,
    );
    let out = dir.path().join("run");
    let o = abi(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let summary = json(&out.join("run_summary.json"));
    assert!(summary["blowup"].is_string());
    assert!(summary["final_time"].as_f64().unwrap() < 4.0);
    assert!(out.join("series.csv").exists());
    assert!(out.join("snapshots/snap_0000.bin").exists());
    assert_eq!(json(&out.join("manifest.json"))["exit_code"], 3);
}

#[test]
fn bundled_desk_config_completes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("desk");
    let o = abi(&[
        "simulate",
        "--config",
        repo_file("configs/desk.json").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(fs::read_to_string(out.join("series.csv")).unwrap().lines().count(), 22);
    for f in ["manifest.json", "run_summary.json", "snapshots/snap_0000.bin", "snapshots/snap_0020.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn bundled_linear_probe_slope_is_in_the_window() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = repo_file("configs/linear-probe.json");
    let out = dir.path().join("decay");
    assert_eq!(
        code(&abi(&["decay-report", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dry-run"])),
        0
    );
    assert!(!out.exists());
    let o = abi(&["decay-report", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let r = json(&out.join("decay_report.json"));
    let slope = r["dispersion"]["slope"].as_f64().unwrap();
    assert!((-1.2..=-0.8).contains(&slope), "{slope}");
    assert!(out.join("manifest.json").exists());
}

#[test]
fn decay_report_rejects_windows_past_wrap_around() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("decay.json");
    fs::write(&cfg, r#"{"schema":"abi-decay/1","dispersion":{"n":16,"length":16.0,"t_start":1.0,"t_stop":20.0}}"#)
        .unwrap();
    assert_eq!(code(&abi(&["decay-report", "--config", cfg.to_str().unwrap(), "--dry-run"])), 1);
}
