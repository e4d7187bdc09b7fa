use std::path::Path;
use std::process::{Command, Output};

use pamkit::cli::ExperimentConfig;

fn pamkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pamkit"))
        .args(args)
        .env_remove("PAMKIT_THREADS")
        .output()
        .expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.display().to_string()
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn hypotheses_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = pamkit(&[
        "hypotheses",
        "--kernel",
        "riesz:beta=0.5",
        "--process",
        "stable:alpha=1.5",
        "--beta0",
        "0.25",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("hypotheses.json")).unwrap()).unwrap();
    assert_eq!(v["I"], true);
    assert_eq!(v["II"], true);
    assert_eq!(v["config"]["model"]["kernel"], "riesz:beta=0.5");
}

#[test]
fn skorohod_first_moment_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = pamkit(&[
        "moments",
        "--sense",
        "skorohod",
        "--p",
        "1",
        "--replicates",
        "50",
        "--out",
        &out_arg(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("moments.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "sense,p,t,x,n_steps,replicates,value,stderr,seed");
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][6].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[0][7].parse::<f64>().unwrap(), 0.0);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = |d: &Path, threads: &str| {
        vec![
            "moments".to_string(),
            "--p".into(),
            "1,2".into(),
            "--replicates".into(),
            "300".into(),
            "--steps".into(),
            "32".into(),
            "--threads".into(),
            threads.into(),
            "--out".into(),
            out_arg(d),
        ]
    };
    for (d, th) in [(a.path(), "1"), (b.path(), "4")] {
        let args = args(d, th);
        let o = pamkit(&args.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(o.status.code(), Some(0));
    }
    let x = std::fs::read(a.path().join("moments.csv")).unwrap();
    let y = std::fs::read(b.path().join("moments.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn echoed_config_reproduces_the_artifact() {
    let a = tempfile::tempdir().unwrap();
    let o = pamkit(&[
        "chaos",
        "--beta0",
        "0",
        "--t",
        "0.25",
        "--steps",
        "16",
        "--replicates",
        "200",
        "--seed",
        "9",
        "--out",
        &out_arg(a.path()),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let first = std::fs::read_to_string(a.path().join("chaos.csv")).unwrap();
    let cfg = ExperimentConfig::from_csv_echo(&first).unwrap();
    assert_eq!(cfg.seed, 9);
    let file = a.path().join("echo.conf");
    std::fs::write(&file, cfg.to_text(true)).unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = pamkit(&["chaos", "--config", &file.display().to_string(), "--out", &out_arg(b.path())]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(b.path().join("chaos.csv")).unwrap(), first);
}

#[test]
fn exit_code_vocabulary() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    assert_eq!(pamkit(&["moments", "--beta0", "1.0", "--out", &out]).status.code(), Some(2));
    assert_eq!(
        pamkit(&["moments", "--kernel", "riesz:beta=1.5", "--dim", "1", "--out", &out])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(pamkit(&["moments", "--kernel", "nonsense", "--out", &out]).status.code(), Some(2));
    assert_eq!(pamkit(&["nonsense"]).status.code(), Some(2));
    let violating = [
        "--process",
        "stable:alpha=1.5",
        "--kernel",
        "riesz:beta=0.9",
        "--beta0",
        "0.5",
        "--out",
        &out,
    ];
    let mut args = vec!["hypotheses"];
    args.extend(violating);
    assert_eq!(pamkit(&args).status.code(), Some(3));
    assert!(dir.path().join("hypotheses.json").exists());
    let mut args = vec!["moments", "--sense", "stratonovich", "--replicates", "10"];
    args.extend(violating);
    assert_eq!(pamkit(&args).status.code(), Some(3));
    let mut args = vec!["expected-hamiltonian"];
    args.extend(violating);
    assert_eq!(pamkit(&args).status.code(), Some(4));
    assert_eq!(
        pamkit(&["holder", "--lags", "3", "--replicates", "10", "--out", &out])
            .status
            .code(),
        Some(5)
    );
    assert_eq!(pamkit(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_sections_match_flags() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("run.conf");
    std::fs::write(
        &file,
        "[model]\nprocess = stable:alpha=1.5\nkernel = riesz:beta=0.5\nbeta0 = 0.25\n\n[paths]\ncount = 3\n\n[grid]\nsteps = 8\n",
    )
    .unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let o = pamkit(&["paths", "--config", &file.display().to_string(), "--out", &out_arg(&a)]);
    assert_eq!(o.status.code(), Some(0));
    let o = pamkit(&[
        "paths",
        "--process",
        "stable:alpha=1.5",
        "--kernel",
        "riesz:beta=0.5",
        "--beta0",
        "0.25",
        "--count",
        "3",
        "--steps",
        "8",
        "--out",
        &out_arg(&b),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let x = std::fs::read_to_string(a.join("paths.csv")).unwrap();
    assert_eq!(x, std::fs::read_to_string(b.join("paths.csv")).unwrap());
    assert_eq!(data_rows(&x).len(), 3 * 9);
    std::fs::write(&file, "[mc]\nkernel = cauchy\n").unwrap();
    assert_eq!(pamkit(&["paths", "--config", &file.display().to_string()]).status.code(), Some(2));
}
