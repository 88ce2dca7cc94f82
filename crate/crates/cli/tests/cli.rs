use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn rtlr(args: &[&str], threads: Option<usize>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rtlr"));
    cmd.args(args);
    if let Some(t) = threads {
        cmd.env("RAYON_NUM_THREADS", t.to_string());
    }
    cmd.output().unwrap()
}

fn generate(dir: &Path, vertices: usize) -> String {
    let path = dir.join("graph.txt");
    let out = rtlr(&["generate", "--vertices", &vertices.to_string(), "--seed", "3", "--out", path.to_str().unwrap()], None);
    assert!(out.status.success());
    path.to_str().unwrap().to_string()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sweep_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), 300);
    let args = [
        "sweep", "--dataset", &data, "--snapshots", "8", "--theta", "40", "--l", "1,3", "--group-size", "2,4",
        "--queries", "3", "--eval-trials", "100", "--seed", "5",
    ];
    let one = rtlr(&args, Some(1));
    let four = rtlr(&args, Some(4));
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(stdout(&one), stdout(&four));
    let text = stdout(&one);
    assert!(text.starts_with("query_id,algorithm,l,group,runtime_ms,probes,est_gain,mc_gain,edges\n"));
    // 2 sizes x 2 budgets x 3 queries x 3 algorithms
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 36);
    assert_eq!(text.lines().filter(|l| l.starts_with("# summary")).count(), 3);
}

#[test]
fn query_on_single_candidate_history() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("t1.txt");
    fs::write(&data, "1 2 0\n2 3 0\n1 2 1\n").unwrap();
    let out = rtlr(&["query", "--dataset", data.to_str().unwrap(), "--snapshots", "2", "--group", "1", "--l", "1", "--eval-trials", "50"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<String> = stdout(&out).lines().skip(1).map(String::from).collect();
    assert_eq!(rows, ["0,sbg,1,1,,1,1,1,2->3", "0,ce_sbg,1,1,,1,1,1,2->3", "0,o_sbg,1,1,,1,1,1,2->3"]);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), 200);
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("dataset = {data}\nsnapshots = 6\ntheta = 30\nl = 4\nalgorithm = sbg\n")).unwrap();
    let out = rtlr(&["query", "--config", cfg.to_str().unwrap(), "--group", "1", "--l", "2"], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows: Vec<String> = stdout(&out).lines().skip(1).map(String::from).collect();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("0,sbg,2,1,"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), 200);

    let unknown = rtlr(&["query", "--dataset", &data, "--snapshots", "5", "--group", "zzz"], None);
    assert_eq!(unknown.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("unknown vertex"));

    assert_eq!(rtlr(&["query", "--no-such-flag"], None).status.code(), Some(1));
    assert_eq!(rtlr(&["sweep", "--dataset", &data, "--algorithm", "imm"], None).status.code(), Some(1));

    let missing = dir.path().join("missing.txt");
    let io = rtlr(&["query", "--dataset", missing.to_str().unwrap(), "--group", "1"], None);
    assert_eq!(io.status.code(), Some(2));

    let groups: Vec<String> = (0..60).map(|i| i.to_string()).collect();
    let big = rtlr(&["evaluate", "--dataset", &data, "--snapshots", "5", "--group", &groups.join(","), "--exact", "--eval-trials", "10"], None);
    assert_eq!(big.status.code(), Some(3), "{}", String::from_utf8_lossy(&big.stderr));

    assert_eq!(rtlr(&["--help"], None).status.code(), Some(0));
}

#[test]
fn predict_output_feeds_back_as_gt_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = generate(dir.path(), 200);
    let gt = dir.path().join("gt.txt");
    let out = rtlr(&["predict", "--dataset", &data, "--snapshots", "6", "--predictor", "union:3", "--out", gt.to_str().unwrap()], None);
    assert!(out.status.success());
    let base = ["query", "--dataset", &data, "--snapshots", "6", "--group", "1,2", "--l", "2", "--theta", "30"];
    let via_file = rtlr(&[&base[..], &["--gt-file", gt.to_str().unwrap()]].concat(), None);
    let via_predictor = rtlr(&[&base[..], &["--predictor", "union:3"]].concat(), None);
    assert!(via_file.status.success(), "{}", String::from_utf8_lossy(&via_file.stderr));
    assert_eq!(stdout(&via_file), stdout(&via_predictor));
}

#[test]
fn theta_bound_prints_value() {
    let out = rtlr(&["theta-bound", "--vertices", "100", "--l", "1", "--epsilon", "1"], None);
    assert!(out.status.success());
    // (8 + 2) * 100 * (ln 100 + ln 100 + ln 2) / 1
    let want = 1000.0 * (2.0 * 100f64.ln() + 2f64.ln());
    let text = stdout(&out);
    let got: f64 = text.split_whitespace().find_map(|f| f.strip_prefix("theta=")).unwrap().parse().unwrap();
    assert!((got - want).abs() < 1e-6 * want);
}
