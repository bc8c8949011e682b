use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oppenheim-trim"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn identity_check_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["identity-check", "--out", "id"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 9);
    assert!(tmp.path().join("id/identity.json").is_file());
}

#[test]
fn verify_default_config_writes_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--paths", "10", "--workers", "1", "--out", "v"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let dir = tmp.path().join("v");
    for f in ["report.csv", "report.json", "summary.txt"] {
        assert!(dir.join(f).is_file(), "{f}");
    }
    let csv = fs::read_to_string(dir.join("report.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",20240601")));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert!(json["report"]["beta"].as_f64().unwrap() > 1.0);
    assert_eq!(json["report"]["beta_auto"], true);

    let again = run(&["verify", "--paths", "10", "--workers", "3", "--out", "w"], tmp.path());
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read(dir.join("report.csv")).unwrap(), fs::read(tmp.path().join("w/report.csv")).unwrap());

    let table = run(&["report", "v/report.csv"], tmp.path());
    assert_eq!(code(&table), 0);
    assert!(String::from_utf8(table.stdout).unwrap().contains("trimmed_over_d"));
}

#[test]
fn tolerance_failure_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["verify", "--nmax", "10000", "--paths", "4", "--set", "tolerances.trimmed_d=1e-9"],
        tmp.path(),
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL iid_x/trimmed_over_d"));
}

#[test]
fn config_errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["verify", "--config", "missing.json"], tmp.path())), 1);
    assert_eq!(code(&run(&["verify", "--set", "model.plan.gama=0.3"], tmp.path())), 1);
    assert_eq!(code(&run(&["verify", "--set", "mode=chain"], tmp.path())), 1);
    assert_eq!(code(&run(&["report", "missing.csv"], tmp.path())), 1);
    fs::write(tmp.path().join("bad.json"), "{\"model\": 3}").unwrap();
    assert_eq!(code(&run(&["diagnostics", "--config", "bad.json"], tmp.path())), 1);
}

#[test]
fn sweep_echoes_one_target_per_set() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["sweep", "--set", "model.plan.gamma=0.2,0.4", "--nmax", "10000", "--paths", "4", "--out", "s"],
        tmp.path(),
    );
    assert!(code(&o) == 0 || code(&o) == 2, "{}", String::from_utf8_lossy(&o.stderr));
    for (dir, target) in [("gamma=0.2", 0.2), ("gamma=0.4", 0.4)] {
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(tmp.path().join("s").join(dir).join("report.json")).unwrap()).unwrap();
        assert!((json["report"]["nlogn_target"].as_f64().unwrap() - target).abs() < 1e-12);
    }
    let index = fs::read_to_string(tmp.path().join("s/sweep.csv")).unwrap();
    assert_eq!(index.lines().count(), 3);
}

#[test]
fn simulate_and_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        &["simulate", "--set", "mode=both", "--set", "n_grid=[50,100]", "--paths", "2", "--seed", "7", "--out", "sim"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let iid = fs::read_to_string(tmp.path().join("sim/samples_iid_x.csv")).unwrap();
    let chain = fs::read_to_string(tmp.path().join("sim/samples_chain.csv")).unwrap();
    assert_eq!(iid.lines().count(), 1 + 2 * 100);
    assert!(chain.starts_with("path_id,step,b,r,x,seed\n"));
    assert!(iid.lines().skip(1).all(|l| l.ends_with(",7")));

    let d = run(&["diagnostics", "--out", "diag"], tmp.path());
    assert_eq!(code(&d), 0);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("diag/assumptions.json")).unwrap()).unwrap();
    assert_eq!(json["assumptions"]["rows"].as_array().unwrap().len(), 4);
    assert_eq!(json["assumptions"]["ratio2_decreasing"], true);
}
