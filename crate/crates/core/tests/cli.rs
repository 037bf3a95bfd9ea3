use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pme-absorb"));
    c.env_remove("PME_ABSORB_OUT");
    c
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn presets_listed() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["presets"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for name in ["default", "low-sum", "critical"] {
        assert!(text.contains(name), "{text}");
    }
}

#[test]
fn shoot_writes_files_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = run(&["shoot", "--preset", "low-sum", "--out", out], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["shoot.json", "profile.csv", "config.toml"] {
        let a = std::fs::read(dir.path().join("a").join(f)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(f)).unwrap();
        assert!(a == b, "{f} differs between identical runs");
    }
    let csv = std::fs::read_to_string(dir.path().join("a/profile.csv")).unwrap();
    let mut lines = csv.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap().strip_prefix("# ").unwrap()).unwrap();
    assert_eq!(header["task"], "shoot");
    assert_eq!(header["params"]["m"], 1.2);
    assert_eq!(lines.next().unwrap(), "xi,f,df,F,dF");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first.len(), 5);
    assert!(first[0].contains('e') && first[0].split('e').next().unwrap().len() == 18);
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("a/shoot.json")).unwrap()).unwrap();
    assert!(doc["result"]["shooting"]["a_star"].as_f64().unwrap() > 1e59);
    assert_eq!(doc["header"]["settings"]["bracket_tol"], 1e-15);
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let root = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["verify-profile", "--preset", "critical", "--quiet"])
        .env("PME_ABSORB_OUT", root.path())
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    assert!(root.path().join("out/verify.json").is_file());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let write = |name: &str, text: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, text).unwrap();
        p.to_str().unwrap().to_string()
    };
    let cases = [
        (write("sigma.toml", "[params]\nm = 2.0\nq = 0.5\nsigma = 0.5\n"), "params.sigma"),
        (write("unknown.toml", "[params]\npreset = \"default\"\nwidth = 3\n"), "width"),
        (write("mismatch.toml", "task = \"sweep\"\n"), "task"),
        (write("syntax.toml", "[params\n"), "config"),
    ];
    for (path, needle) in &cases {
        let o = run(&["shoot", "--config", path], dir.path());
        assert_eq!(o.status.code(), Some(2), "{path}: {}", stderr(&o));
        assert!(stderr(&o).contains(needle), "{path}: {}", stderr(&o));
    }
    let o = run(&["simulate", "--preset", "default"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("simulate"));
    let o = run(&["acceptance", "--only", "14"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = run(&["shoot", "--m", "0.5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["no-such-task"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn simulate_constant_datum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "task = \"simulate\"\noutput_dir = \"sim\"\n[params]\npreset = \"default\"\n\
         [simulate]\nr_max = 2.0\nn_cells = 100\nt_end = 0.5\nlog_every = 0.1\nsnapshots = true\n\
         rescaled_error = false\ndatum = { kind = \"constant\", c = 1.0 }\n",
    )
    .unwrap();
    let o = run(&["simulate", "-c", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    // domain smaller than 2R(t): warned, not refused
    assert!(stderr(&o).contains("warning"));
    let obs = std::fs::read_to_string(dir.path().join("sim/observations.csv")).unwrap();
    assert_eq!(obs.lines().count(), 2 + 6);
    assert!(dir.path().join("sim/snapshot_0005.csv").is_file());
    let echo = std::fs::read_to_string(dir.path().join("sim/config.toml")).unwrap();
    assert!(echo.contains("task = \"simulate\"") && echo.contains("n_cells = 100"));
}
