use std::path::Path;
use std::process::{Command, Output};

fn gtl(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gtl"))
        .args(args)
        .current_dir(cwd)
        .env_remove("GTL_MNIST_DIR")
        .env_remove("GTL_HAPT_DIR")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn missing_dataset_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[dataset]\nkind = \"mnist\"\npath = \"nowhere\"\n",
    );
    let out = gtl(&["run", "--config", &cfg], dir.path());
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
    assert_eq!(
        gtl(&["validate", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        gtl(&["run", "--preset", "no-such-preset"], dir.path())
            .status
            .code(),
        Some(2)
    );
    assert_eq!(gtl(&["run"], dir.path()).status.code(), Some(2));
}

#[test]
fn synthetic_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let start = std::time::Instant::now();
    // Different worker counts must not change the results.
    for (out, threads) in [("a", "1"), ("b", "4")] {
        let o = gtl(
            &["--threads", threads, "run", "--preset", "synthetic", "--out", out, "--seed", "4"],
            dir.path(),
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert!(start.elapsed().as_secs() < 60);
    let a = std::fs::read(dir.path().join("a/metrics.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/metrics.csv")).unwrap();
    assert!(a.len() > 100);
    assert_eq!(a, b);
    let a = std::fs::read(dir.path().join("a/overhead.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b/overhead.csv")).unwrap();
    assert_eq!(a, b);

    let o = gtl(&["report", "--out", "a"], dir.path());
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("| gtl |"));
}

#[test]
fn sweeps_need_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "s.toml",
        "runs = 1\n[partition]\nnum_locations = 4\n[protocol.greedy]\nkappa = 4\n[sweep]\naxis = \"num_aggregators\"\nvalues = []\n",
    );
    let o = gtl(&["sweep", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let o = gtl(
        &[
            "sweep",
            "--config",
            &cfg,
            "--axis",
            "num_aggregators",
            "--values",
            "1,4",
            "--out",
            "sw",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("sw/sweep_steps.csv")).unwrap();
    assert!(text.contains("num_aggregators,1,") && text.contains("num_aggregators,4,"));
}

#[test]
fn empty_report_renders_empty_tables() {
    let dir = tempfile::tempdir().unwrap();
    let report = gtl_core::experiment::ExperimentReport::empty(&Default::default());
    std::fs::write(
        dir.path().join("report.json"),
        serde_json::to_string(&report).unwrap(),
    )
    .unwrap();
    let o = gtl(&["report", "--out", "."], dir.path());
    assert!(o.status.success());
    assert!(o.stdout.starts_with(b"wrote"));
}
