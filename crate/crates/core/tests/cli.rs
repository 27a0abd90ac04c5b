use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_mhop-sim");

fn cli(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("MHOP_SIM_WORKERS")
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let path = dir.join("small.conf");
    fs::write(
        &path,
        "# tiny matrix\nseeds = 1,2\nduration = 20\nwarmup = 10\nnodes = 10\nside = 400\nflows = 4\n",
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn filtered_matrix_has_two_rows_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let mut csvs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = cli(&[
            "matrix",
            "--config",
            &cfg,
            "--out",
            out_dir.to_str().unwrap(),
            "--metric",
            "etx",
            "--rate",
            "2",
            "--workers",
            "2",
        ]);
        // Trends are untestable on this slice, so the exit status is not
        // asserted; the files must exist either way.
        assert!(out.status.code().is_some());
        for f in ["results.csv", "trends.txt", "trends.csv", "config.conf"] {
            assert!(out_dir.join(f).exists(), "{f} missing");
        }
        csvs.push(fs::read(out_dir.join("results.csv")).unwrap());
    }
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("profile,metric,rate,throughput_mean,e2ed_mean,nrl_mean,seed1_throughput"));
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn simulate_then_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let topo = dir.path().join("topo.txt");
    let meta = dir.path().join("run.meta");
    let out = cli(&[
        "simulate",
        "--config",
        &cfg,
        "--profile",
        "eolsr",
        "--metric",
        "md",
        "--rate",
        "4",
        "--seed",
        "3",
        "--topology-out",
        topo.to_str().unwrap(),
        "--meta-out",
        meta.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("profile=eolsr metric=md"), "{stdout}");

    let csv = dir.path().join("report.csv");
    let out = cli(&[
        "analyze",
        "--topology",
        topo.to_str().unwrap(),
        "--run-meta",
        meta.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
        "--source",
        "0",
        "--sink",
        "1",
        "--beta-cri",
        "1e9",
        "--tau-cri",
        "1e3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = String::from_utf8(out.stdout).unwrap();
    assert!(report.contains("tc reading: prose"));
    assert!(report.contains("hello_receptions"));
    let csv = fs::read_to_string(csv).unwrap();
    assert!(csv.starts_with("quantity,analytical,simulated,ratio\n"));
    assert!(csv.contains("max_e,"));
}

#[test]
fn trace_goes_to_stdout_and_summary_to_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = cli(&["simulate", "--config", &cfg, "--duration", "1", "--trace"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let first = stdout.lines().next().unwrap();
    assert!(first.split_whitespace().count() >= 3, "{first}");
    assert!(first.split_whitespace().next().unwrap().parse::<f64>().is_ok());
    assert!(String::from_utf8(out.stderr).unwrap().contains("data_sent="));
}

#[test]
fn bad_arguments_fail_cleanly() {
    let out = cli(&["simulate", "--metric", "hops"]);
    assert!(!out.status.success());
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "nodes = many\n").unwrap();
    let out = cli(&["simulate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("error:"));
}
