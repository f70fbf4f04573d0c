use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn viscophase(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_viscophase"));
    c.args(args);
    for (k, v) in envs {
        c.env(k, v);
    }
    c.output().expect("binary runs")
}

fn small_run(out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![
        "run",
        "--out",
        out.to_str().unwrap(),
        "--override",
        "grid.n=16",
        "--override",
        "time.dt=1e-4",
        "--override",
        "time.t_end=2e-3",
    ];
    args.extend_from_slice(extra);
    viscophase(&args, &[])
}

#[test]
fn run_writes_artifacts_and_report_rechecks() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("run");
    let o = small_run(&out, &["--override", "time.output_every=10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["manifest.txt", "diagnostics.csv", "report.txt", "report.jsonl"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let snaps = fs::read_dir(out.join("snapshots")).unwrap().count();
    assert_eq!(snaps, 3);
    assert_eq!(
        fs::read_to_string(out.join("diagnostics.csv")).unwrap().lines().count(),
        22
    );
    let r = viscophase(&["report", out.to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&r.stdout).contains("PASS  mass drift"));
}

#[test]
fn identical_seeds_give_identical_diagnostics() {
    let d = tempfile::tempdir().unwrap();
    let (a, b, c) = (d.path().join("a"), d.path().join("b"), d.path().join("c"));
    small_run(&a, &["--seed", "7"]);
    small_run(&b, &["--seed", "7"]);
    small_run(&c, &["--seed", "8"]);
    let read = |p: &Path| fs::read_to_string(p.join("diagnostics.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn thread_count_does_not_change_results() {
    let d = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = d.path().join(name);
        let o = viscophase(
            &[
                "weakstrong",
                "--out",
                out.to_str().unwrap(),
                "--override",
                "grid.n=16",
                "--override",
                "time.dt=1e-4",
                "--override",
                "time.t_end=2e-3",
            ],
            &[("VISCOPHASE_THREADS", threads)],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read_to_string(out.join("weakstrong_eps1e-3.csv")).unwrap()
    };
    assert_eq!(run("one", "1"), run("four", "4"));
}

#[test]
fn bad_thread_count_is_a_configuration_error() {
    let d = tempfile::tempdir().unwrap();
    let o = viscophase(
        &["run", "--out", d.path().to_str().unwrap()],
        &[("VISCOPHASE_THREADS", "zero")],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2_with_line_numbers() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("bad.cfg");
    fs::write(&cfg, "# comment\ngrid.n = 16\nregularization.delta = 0.7\n").unwrap();
    let o = viscophase(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3") && err.contains("(0, 1/2)"), "{err}");

    fs::write(&cfg, "grid.n = 16\nstabilization.a = 0.4\n").unwrap();
    let o = viscophase(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("a > c4/2"));

    fs::write(&cfg, "grid.nn = 16\n").unwrap();
    let o = viscophase(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let o = viscophase(&["run", "--config", "/nonexistent/x.cfg"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tampered_manifest_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("run");
    small_run(&out, &[]);
    let m = fs::read_to_string(out.join("manifest.txt")).unwrap();
    fs::write(out.join("manifest.txt"), m.replace("c0 = 0.0025", "c0 = 0.003")).unwrap();
    let r = viscophase(&["report", out.to_str().unwrap()], &[]);
    assert_eq!(r.status.code(), Some(2));
}

fn cfl_violation(dt: &str, out: &Path) -> Output {
    viscophase(
        &[
            "run",
            "--out",
            out.to_str().unwrap(),
            "--override",
            "grid.n=64",
            "--override",
            "viscosity.eta=1e-3",
            "--override",
            "init.u=taylor-green(1.0)",
            "--override",
            &format!("time.dt={dt}"),
            "--override",
            "time.t_end=1",
        ],
        &[],
    )
}

#[test]
fn blow_up_exits_3_and_keeps_partial_csv() {
    let d = tempfile::tempdir().unwrap();
    let o = cfl_violation("0.05", d.path());
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stderr).contains("blow-up"));
    let rows = fs::read_to_string(d.path().join("diagnostics.csv"))
        .unwrap()
        .lines()
        .count();
    assert!(rows > 2);
}

#[test]
fn energy_violation_exits_4() {
    let d = tempfile::tempdir().unwrap();
    let o = cfl_violation("0.01", d.path());
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL  energy increase"));
}
