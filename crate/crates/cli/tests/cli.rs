use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn buckle(args: &[&str], cwd: &Path, env_out: Option<&Path>) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_buckle"));
    c.args(args).current_dir(cwd).env_remove("BUCKLE_OUT_DIR");
    if let Some(o) = env_out {
        c.env("BUCKLE_OUT_DIR", o);
    }
    c.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const MINIMAL: &str = "[geometry]\nkind = \"square\"\nn = 2\n[material]\ne = 1.0\nnu = 0.25\nt = 1.0\n\
                       [plate]\nbc = \"clamped\"\n[membrane]\nstress = \"prescribed\"\n";

#[test]
fn preset_one_step_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = buckle(&["preset", "lshape_unit_stress", "--steps", "1", "--out", "res"], dir.path(), None);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let res = dir.path().join("res");
    let vtk = fs::read_to_string(res.join("step_000.vtk")).unwrap();
    assert!(vtk.contains("SCALARS mode_1 double 1") && vtk.contains("SCALARS eta double 1"));
    let csv = fs::read_to_string(res.join("history.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.starts_with("step,ndofs,nelems,lambda_1,lambda_2,lambda_3,estimate,effectivity,seconds\n"));
    assert!(res.join("config.toml").exists());
}

#[test]
fn unknown_preset_exits_2_naming_presets() {
    let dir = tempfile::tempdir().unwrap();
    let o = buckle(&["preset", "lshape"], dir.path(), None);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("lshape_unit_stress") && err.contains("lshape_coupled"), "{err}");
}

#[test]
fn oracle_pencil_small_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = buckle(&["oracle", "pencil_small"], dir.path(), None);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.lines().count() >= 10);
    assert!(out.lines().all(|l| l.starts_with("PASS ")), "{out}");
    assert_eq!(code(&buckle(&["oracle", "nothing"], dir.path(), None)), 2);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(code(&buckle(&["run", "missing.toml"], p, None)), 2);
    fs::write(p.join("empty.toml"), "").unwrap();
    let o = buckle(&["run", "empty.toml"], p, None);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("membrane.stress"));
    fs::write(p.join("typo.toml"), format!("{MINIMAL}[adapt]\nfractoin = 0.5\n")).unwrap();
    assert_eq!(code(&buckle(&["run", "typo.toml"], p, None)), 2);
    assert_eq!(code(&buckle(&["preset"], p, None)), 2);
    assert_eq!(code(&buckle(&["preset", "lshape_unit_stress", "--steps", "x"], p, None)), 2);
    assert_eq!(code(&buckle(&["--help"], p, None)), 0);
}

#[test]
fn solver_error_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // zero stress has no buckling mode
    fs::write(p.join("zero.toml"), format!("{MINIMAL}tensor = [0.0, 0.0, 0.0]\n")).unwrap();
    let o = buckle(&["run", "zero.toml", "--out", "z"], p, None);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("step 0"));
}

#[test]
fn config_run_and_env_override() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("c.toml"), format!("{MINIMAL}[output]\ndir = \"from_config\"\n")).unwrap();
    let env_dir = p.join("from_env");
    let o = buckle(&["run", "c.toml", "--steps", "2", "--out", "from_flag"], p, Some(&env_dir));
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(env_dir.join("step_002.vtk").exists());
    assert!(!p.join("from_flag").exists() && !p.join("from_config").exists());
    let o = buckle(&["run", "c.toml", "--steps", "0", "--out", "from_flag"], p, None);
    assert_eq!(code(&o), 0);
    assert!(p.join("from_flag/step_000.vtk").exists());
    assert!(!p.join("from_flag/step_001.vtk").exists());
}

#[test]
fn dof_budget_stops_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = buckle(&["preset", "lshape_unit_stress", "--dofs", "600", "--out", "b"], dir.path(), None);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("b/history.csv")).unwrap();
    // 481 dofs at step 0, 589 at step 1, then the budget is passed
    let rows = csv.lines().count() - 1;
    assert!((2..13).contains(&rows), "{csv}");
}
