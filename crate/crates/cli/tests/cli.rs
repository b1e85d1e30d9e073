use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_singlimit"))
        .args(args)
        .env("SINGLIMIT_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("run.conf");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn equilibria_table_with_defaults() {
    let o = run(&["equilibria"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<_> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("invasion") && rows[0].contains("9.702380952") && rows[0].ends_with("stable"));
    assert!(rows[1].starts_with("extinction") && rows[1].contains("9.758928571"));
    assert!(rows[2].contains("2.304315476") && rows[2].contains("7.398065476") && rows[2].ends_with("unstable"));
    assert!(rows[3].starts_with("origin") && rows[3].ends_with("unstable"));
}

#[test]
fn check_exit_codes() {
    assert_eq!(run(&["check"]).status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "model.delta = 10\n");
    assert_eq!(run(&["check", "--config", &cfg]).status.code(), Some(3));
    let cfg = write_config(dir.path(), "model.sf = 0.9\n");
    let o = run(&["check", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(run(&["check", "--config", "/nonexistent/run.conf"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn shipped_configs_pass_the_audit() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["figure1.conf", "figure2.conf"] {
        let path = root.join(name);
        let o = run(&["check", "--config", path.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stdout(&o));
    }
}

#[test]
fn show_config_lists_defaults() {
    let o = run(&["--show-config"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for (key, value) in [("model.fu", "1.12"), ("model.delta", "10/9"), ("grid.dx", "0.05"), ("time.dt", "0.005")] {
        assert!(
            text.lines().any(|l| l.starts_with(key) && l.contains(&format!("= {value}")) && !l.contains("choice")),
            "{key}"
        );
    }
    assert!(text.lines().any(|l| l.starts_with("init.radius") && l.ends_with("# choice")));
}

#[test]
fn simulate_writes_identical_outputs_and_wavespeed_is_positive() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "time.t_end = 10\ntime.output_every = 500\nexperiment.norm_horizon = 10\nexperiment.speed_window = 5, 10\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["simulate", "--config", &cfg, "--model", "system", "--out", out.to_str().unwrap(), "--svg"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let manifest = fs::read_to_string(a.join("manifest.csv")).unwrap();
    assert!(manifest.starts_with("time,filename\n"));
    assert_eq!(manifest.lines().count(), 1 + 3 * 5);
    for line in manifest.lines().skip(1) {
        let file = line.split(',').nth(1).unwrap();
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    assert!(fs::read_to_string(a.join("p.svg")).unwrap().contains("<svg"));

    let o = run(&["simulate", "--model", "limit", "--out", dir.path().join("lim").to_str().unwrap()]);
    assert!(o.status.success());
    let o = run(&["wavespeed", "--model", "limit"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let speed: f64 = stdout(&o).trim().parse().unwrap();
    assert!(speed > 0.0);
}

#[test]
fn converge_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "time.t_end = 5\nexperiment.norm_horizon = 5\nexperiment.epsilons = 0.3, 0.1\nexperiment.speed_window = 1, 5\n",
    );
    let out = dir.path().join("out");
    let o = run(&["converge", "--config", &cfg, "--out", out.to_str().unwrap(), "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("report.csv")).unwrap();
    let lines: Vec<_> = report.lines().collect();
    assert_eq!(lines[0], "epsilon,err_p,err_m,speed,limit_speed");
    assert_eq!(lines.len(), 3);
    assert!(out.join("errors.svg").exists());
}

#[test]
fn runtime_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "time.t_end = 1\nexperiment.norm_horizon = 1\n");
    let o = run(&["wavespeed", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}
