use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relevance"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_config(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(out)))
}

const COIN: &str = r#"spec_version = 1
seed = 11

[parameter_space]
lo = -0.5
hi = 0.5

[actions]
a0 = "fair"
a1 = "biased"

[loss]
kind = "builtin_coin_demo"
"#;

fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn coin_with(dir: &tempfile::TempDir, extra: &str) -> PathBuf {
    write_config(dir, "config.toml", &format!("{COIN}\n{extra}"))
}

#[test]
fn partition_coin_csv() {
    let out = run_config("partition", &shipped("coin_partition.toml"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "lo,hi,lo_open,hi_open,label\n\
         -0.5,-0.106,false,true,relevant\n\
         -0.106,0.106,false,false,negligible\n\
         0.106,0.5,true,false,relevant\n"
    );
}

#[test]
fn partition_json_lists_crossings() {
    let out = run_config("partition", &shipped("coin_partition.toml"), &["--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["crossings"], serde_json::json!([-0.106, 0.106]));
    assert_eq!(v["actions"]["a0_label"], "treat the coin as fair");
}

#[test]
fn partition_equal_losses_is_one_negligible_row() {
    let dir = tempfile::tempdir().unwrap();
    let text = COIN.replace(
        "kind = \"builtin_coin_demo\"",
        "kind = \"quadratic\"\nparams_a0 = { c = 1.0 }\nparams_a1 = { c = 1.0 }",
    );
    let cfg = write_config(&dir, "equal.toml", &text);
    let out = run_config("partition", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(
        stdout(&out),
        "lo,hi,lo_open,hi_open,label\n-0.5,0.5,false,false,negligible\n"
    );
}

#[test]
fn partition_with_plot_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("part.csv");
    let out = run_config(
        "partition",
        &shipped("coin_partition.toml"),
        &["--output", csv.to_str().unwrap(), "--plot"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(fs::read_to_string(&csv).unwrap().starts_with("lo,hi,"));
    let svg = fs::read_to_string(dir.path().join("part.svg")).unwrap();
    assert!(svg.contains("<svg") && svg.contains(">-0.106<"));
}

#[test]
fn missing_loss_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "c.toml",
        &COIN.replace("[loss]\nkind = \"builtin_coin_demo\"\n", ""),
    );
    let out = run_config("partition", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("loss"), "{}", stderr(&out));
}

#[test]
fn unknown_key_is_a_config_error_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.toml", &COIN.replace("hi = 0.5", "hi = 0.5\nmid = 0.0"));
    let out = run_config("partition", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("mid") && err.contains("line"), "{err}");
}

#[test]
fn input_errors_exit_2() {
    assert_eq!(run(&["partition"]).status.code(), Some(2));
    assert_eq!(
        run(&["partition", "--config", "/nonexistent/relevance.toml"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    let out = run_config("partition", &shipped("coin_partition.toml"), &["--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
    // A command needing a section the document lacks.
    let out = run_config("decide", &shipped("coin_partition.toml"), &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("decision"));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
}

#[test]
fn check_hypotheses_verdicts() {
    let out = run_config("check-hypotheses", &shipped("coin_hypotheses_complete.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(
        (v["complete"].as_bool(), v["partial"].as_bool()),
        (Some(true), Some(true))
    );
    assert!(v["witness"].is_null());

    let out = run_config("check-hypotheses", &shipped("coin_hypotheses_partial.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(
        (v["complete"].as_bool(), v["partial"].as_bool()),
        (Some(false), Some(true))
    );
    assert!(v["witness"].is_number());

    let dir = tempfile::tempdir().unwrap();
    let cfg = coin_with(&dir, "[hypotheses]\nh0 = [0.3]\nh1 = [0.0]\n");
    let v = json(&run_config("check-hypotheses", &cfg, &[]));
    assert_eq!(v["partial"], false);
    assert_eq!(v["witness"].as_f64(), Some(0.0));
}

#[test]
fn overlapping_hypotheses_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coin_with(&dir, "[hypotheses]\nh0 = [[-0.2, 0.2]]\nh1 = [[0.1, 0.5]]\n");
    let out = run_config("check-hypotheses", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("overlap"));
}

fn decide(dir: &tempfile::TempDir, n: u64, k: u64, ratio: &str) -> Value {
    let cfg = coin_with(
        dir,
        &format!("[model]\nfamily = \"binomial\"\nn = {n}\nk = {k}\n\n[decision]\nloss_ratio = {ratio}\n"),
    );
    let out = run_config("decide", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    json(&out)
}

#[test]
fn decide_examples() {
    let dir = tempfile::tempdir().unwrap();
    let v = decide(&dir, 20, 20, "1.0");
    assert_eq!(v["decision"], "a1");
    assert_eq!(v["chosen"], "biased");
    assert!(v["posterior_h1"].as_f64().unwrap() > 0.99);
    assert_eq!(decide(&dir, 10, 5, "1.0")["decision"], "a0");
    assert_eq!(decide(&dir, 10, 5, "[0.01, 100]")["decision"], "indeterminate");
}

#[test]
fn decide_expected_loss_rule() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coin_with(
        &dir,
        "[model]\nfamily = \"binomial\"\nn = 20\nk = 20\n\n[decision]\nrule = \"expected_loss\"\n",
    );
    let v = json(&run_config("decide", &cfg, &[]));
    assert_eq!(v["decision"], "a1");
    assert_eq!(v["rule"], "expected_loss");
}

#[test]
fn degenerate_evidence_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coin_with(
        &dir,
        "[hypotheses]\nh0 = [0.0]\nh1 = [0.3]\nrestricted_space = true\n\n\
         [model]\nfamily = \"binomial\"\nn = 10\nk = 5\n\n[decision]\nloss_ratio = 1.0\n",
    );
    let out = run_config("decide", &cfg, &[]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn compare_table_has_one_row_per_procedure() {
    let out = run_config("compare", &shipped("coin_decide.toml"), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[1].starts_with("nhst,reject,"));
    assert!(lines[5].starts_with("decision:hypothesis_ratio,a1,"));
}

#[test]
fn compare_records_inapplicable_procedures_as_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coin_with(
        &dir,
        "[model]\nfamily = \"binomial\"\nn = 10\nk = 5\n\n[[comparators]]\nprocedure = \"tost\"\n",
    );
    let out = run_config("compare", &cfg, &["--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)[0]["verdict"], "error");
}

#[test]
fn simulate_aspirin_paradox() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("aspirin.csv");
    let out = run_config(
        "simulate",
        &shipped("aspirin_simulate.toml"),
        &["--output", csv.to_str().unwrap()],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("hypothesis_ratio"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("aspirin.json")).unwrap()).unwrap();
    let rate = |procedure: &str, verdict: &str| {
        summary["rows"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["procedure"] == procedure && r["verdict"] == verdict)
            .unwrap()["frequency"]
            .as_f64()
            .unwrap()
    };
    assert!(rate("nhst", "reject") >= 0.8);
    assert!(rate("rope", "accept_a0") >= 0.95);
    assert!(rate("hypothesis_ratio", "a0") >= 0.95);
    assert!(fs::read_to_string(&csv)
        .unwrap()
        .starts_with("true_effect,n,procedure,verdict,count,frequency,std_error\n"));
}

#[test]
fn simulate_single_replicate_and_thread_invariance() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coin_with(
        &dir,
        "[scenario]\nname = \"tiny\"\nfamily = \"binomial\"\ntrue_effect_grid = [-0.2, 0.0, 0.3]\n\
         sample_size_grid = [10, 40]\nreplicates = 1\n\
         procedures = [{ procedure = \"nhst\" }, { procedure = \"hypothesis_ratio\" }]\n",
    );
    let one = run_config("simulate", &cfg, &["--threads", "1"]);
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    let text = stdout(&one);
    for line in text.lines().skip(1) {
        let freq: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(freq == 0.0 || freq == 1.0, "{line}");
    }
    let four = run_config("simulate", &cfg, &["--threads", "4"]);
    assert_eq!(one.stdout, four.stdout);
    let reseeded = run_config("simulate", &cfg, &["--seed", "12"]);
    assert_eq!(reseeded.status.code(), Some(0));
}

#[test]
fn simulate_unknown_procedure_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = coin_with(
        &dir,
        "[scenario]\nname = \"bad\"\nfamily = \"binomial\"\ntrue_effect_grid = [0.0]\n\
         sample_size_grid = [10]\nreplicates = 5\nprocedures = [{ procedure = \"p_hacking\" }]\n",
    );
    let out = run_config("simulate", &cfg, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("p_hacking"), "{}", stderr(&out));
}

#[test]
fn plot_coin_and_grid_override() {
    let out = run_config("plot", &shipped("coin_partition.toml"), &[]);
    assert_eq!(out.status.code(), Some(0));
    let svg = stdout(&out);
    assert!(svg.contains(">-0.106<") && svg.contains(">0.106<"));
    assert!(svg.contains("class=\"curve-a0\"") && svg.contains("class=\"curve-a1\""));

    let out = run_config("plot", &shipped("coin_partition.toml"), &["--grid", "64"]);
    let svg = stdout(&out);
    let start = svg.find("class=\"curve-a0\" points=\"").unwrap() + "class=\"curve-a0\" points=\"".len();
    let points = &svg[start..start + svg[start..].find('"').unwrap()];
    assert_eq!(points.split_whitespace().count(), 64);
}

#[test]
fn plot_equal_losses_has_no_markers() {
    let dir = tempfile::tempdir().unwrap();
    let text = COIN.replace(
        "kind = \"builtin_coin_demo\"",
        "kind = \"table\"\nparams_a0 = { grid = [-0.5, 0.5], values = [1, 1] }\nparams_a1 = { grid = [-0.5, 0.5], values = [1, 1] }",
    );
    let cfg = write_config(&dir, "eq.toml", &text);
    let out = run_config("plot", &cfg, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("crossing"));
}

#[test]
fn unwritable_output_exits_3() {
    let out = run_config(
        "plot",
        &shipped("coin_partition.toml"),
        &["--output", "/nonexistent-dir/relevance/plot.svg"],
    );
    assert_eq!(out.status.code(), Some(3));
    let out = run_config(
        "partition",
        &shipped("coin_partition.toml"),
        &["--output", "/nonexistent-dir/relevance/part.csv"],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn artifacts_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for (cmd, cfg, ext) in [
        ("partition", "coin_partition.toml", "csv"),
        ("check-hypotheses", "coin_hypotheses_partial.toml", "json"),
        ("simulate", "aspirin_simulate.toml", "csv"),
        ("plot", "coin_plot.toml", "svg"),
    ] {
        let a = dir.path().join(format!("a.{ext}"));
        let b = dir.path().join(format!("b.{ext}"));
        for path in [&a, &b] {
            let out = run_config(cmd, &shipped(cfg), &["--output", path.to_str().unwrap()]);
            assert_eq!(out.status.code(), Some(0), "{cmd}: {}", stderr(&out));
        }
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap(), "{cmd}");
    }
}
