use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dirlab"));
    c.env_remove("DIRLAB_THREADS");
    c
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("spawn dirlab")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn alpha_out_of_range_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["capacity", "--alpha", "1.2"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("1.2"));
}

#[test]
fn invalid_set_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "set": {"a0": 3.0, "ratio": 0.5, "depth": 4}}"#);
    let o = run(&["cantor", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn config_schema_is_checked() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 7}"#);
    assert_eq!(code(&run(&["cantor", "--config", cfg.to_str().unwrap()], dir.path())), 2);
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "colour": "blue"}"#);
    assert_eq!(code(&run(&["cantor", "--config", cfg.to_str().unwrap()], dir.path())), 2);
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&run(&["cantor", "--config", missing.to_str().unwrap()], dir.path())), 1);
}

#[test]
fn bad_thread_count_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin().args(["cantor", "--out"]).arg(dir.path()).env("DIRLAB_THREADS", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = run(&["cantor"], &blocker.join("sub"));
    assert_eq!(code(&o), 1);
}

#[test]
fn cantor_tables() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["cantor", "--seed", "3"], dir.path())), 0);
    let first = std::fs::read(dir.path().join("cantor.csv")).unwrap();
    let meta = json(&dir.path().join("cantor.json"));
    assert_eq!(meta["schema_version"], 1);
    let mu = meta["report"]["mu"].as_f64().unwrap();
    let fit = meta["report"]["growth_exponent_fit"].as_f64().unwrap();
    assert!((mu - (1.0 - 2f64.ln() / 3f64.ln())).abs() < 1e-12);
    assert!((fit - mu).abs() < 0.02, "fit {fit}");
    assert_eq!(meta["report"]["kset_audits"][0]["pass"], true);

    assert_eq!(code(&run(&["cantor", "--seed", "3"], dir.path())), 0);
    assert_eq!(first, std::fs::read(dir.path().join("cantor.csv")).unwrap());

    assert_eq!(code(&run(&["cantor", "--depth", "0"], dir.path())), 0);
    let meta = json(&dir.path().join("cantor.json"));
    assert!(meta["report"]["mu"].is_null());
    let table = std::fs::read_to_string(dir.path().join("cantor.csv")).unwrap();
    // One arc of length π: every t ≥ π/2 covers the circle.
    for line in table.lines().skip(1) {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((cols[1] - std::f64::consts::TAU).abs() < 1e-12);
    }
}

#[test]
fn capacity_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["capacity", "--alpha", "0.5", "--alpha", "0.7"], dir.path())), 0);
    let v = json(&dir.path().join("capacity.json"));
    let tests = v["report"]["tests"].as_array().unwrap();
    assert_eq!(tests[0]["diagnostics"]["verdict"], "positive");
    assert_eq!(tests[1]["diagnostics"]["verdict"], "zero");
}

#[test]
fn equilibrium_mode_writes_weights() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["capacity", "--mode", "equilibrium", "--alpha", "0.5", "--depth", "5"], dir.path());
    assert_eq!(code(&o), 0);
    let table = std::fs::read_to_string(dir.path().join("equilibrium_alpha0.5.csv")).unwrap();
    let total: f64 = table.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap()).sum();
    assert_eq!(table.lines().count(), 33);
    assert!((total - 1.0).abs() < 1e-12);
    let meta = json(&dir.path().join("equilibrium_alpha0.5.json"));
    assert_eq!(meta["report"]["converged"], true);
}

#[test]
fn outer_roundtrip_through_modulus_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "resolution": {"circle_n": 512, "depth": 4}}"#);
    assert_eq!(code(&run(&["outer", "--config", cfg.to_str().unwrap()], dir.path())), 0);
    let first = json(&dir.path().join("outer.json"));
    for audit in first["report"]["korenblum"].as_array().unwrap() {
        assert_eq!(audit["audit"]["pass"], true);
    }
    let modulus = dir.path().join("modulus.csv");
    let again = dir.path().join("again");
    let body = format!(
        r#"{{"schema_version": 1, "resolution": {{"circle_n": 512}}, "outer": {{"modulus_csv": {:?}}}}}"#,
        modulus.to_str().unwrap()
    );
    let cfg = write_config(dir.path(), &body);
    assert_eq!(code(&run(&["outer", "--config", cfg.to_str().unwrap()], &again)), 0);
    let second = json(&again.join("outer.json"));
    let f0 = |v: &serde_json::Value| v["report"]["f0_abs"].as_f64().unwrap();
    assert!((f0(&first) - f0(&second)).abs() < 1e-12 * f0(&first));
}

#[test]
fn dirichlet_audit_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"schema_version": 1, "alphas": [0.5], "resolution": {"circle_n": 512, "depth": 4}}"#);
    let o = run(&["dirichlet-audit", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = std::fs::read_to_string(dir.path().join("dirichlet_audit.csv")).unwrap();
    assert!(table.starts_with("case,lhs,rhs,ratio,resolution\n"));
    // 4 functions × (8 boundary points + 1 α), less any points skipped at clipped samples.
    let meta = json(&dir.path().join("dirichlet_audit.json"));
    let skipped = meta["report"]["boundary_points_skipped"].as_u64().unwrap() as usize;
    assert_eq!(table.lines().count() - 1, 36 - skipped);
}

#[test]
fn positive_capacity_config_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["cyclicity", "--config", config("positive.json").to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("capacity"));
}

#[test]
fn default_campaign_passes_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("default.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = run(&["cyclicity", "--config", cfg.to_str().unwrap()], &a);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = bin()
        .args(["cyclicity", "--config", cfg.to_str().unwrap(), "--out"])
        .arg(&b)
        .env("DIRLAB_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let name = "cyclicity_alpha0.7.csv";
    assert_eq!(std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
    let meta = json(&a.join("cyclicity_alpha0.7.json"));
    assert_eq!(meta["report"]["all_pass"], true);
    assert_eq!(meta["report"]["campaign"]["records"].as_array().unwrap().len(), 8);
}
