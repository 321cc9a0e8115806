use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dynpred::io::{parse_bundles, parse_deletion_stream, parse_insertion_instance, parse_meta, parse_predictions, parse_stream};

fn dynpred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynpred")).args(args).output().expect("binary runs")
}

fn generate(dir: &Path, problem: &str, model: &str) {
    let out = dynpred(&[
        "generate", "--problem", problem, "--model", model, "--sigma", "6", "--T", "64", "--n", "8", "--seed", "5", "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn generated_files_parse_and_verify_in_every_mode() {
    for problem in ["counter", "connectivity", "msf", "decmax"] {
        let tmp = tempfile::tempdir().unwrap();
        let d = tmp.path();
        generate(d, problem, "uniform");
        let read = |f: &str| fs::read_to_string(d.join(f)).unwrap();
        assert_eq!(parse_stream(&read("stream.txt")).unwrap().len(), 64);
        assert!(!parse_predictions(&read("predictions.txt")).unwrap().is_empty());
        assert!(!parse_bundles(&read("bundles.txt")).unwrap().is_empty());
        assert_eq!(parse_deletion_stream(&read("deletions.txt")).unwrap().len(), 64);
        assert_eq!(parse_insertion_instance(&read("insertions.txt")).unwrap().events.len(), 64);
        assert!(parse_meta(&read("meta.txt")).unwrap().contains_key("l1_error"));

        let mut modes = vec!["predicted", "offline", "brute-force", "backstopped", "boosted"];
        if matches!(problem, "counter" | "connectivity") {
            modes.push("predicted-deletion");
        }
        for mode in modes {
            let out = dynpred(&["verify", "--problem", problem, "--dir", d.to_str().unwrap(), "--mode", mode, "--k", "2"]);
            assert_eq!(out.status.code(), Some(0), "{problem} {mode}: {}", String::from_utf8_lossy(&out.stdout));
        }
    }
}

#[test]
fn exact_model_writes_zero_error() {
    let tmp = tempfile::tempdir().unwrap();
    generate(tmp.path(), "msf", "exact");
    let meta = parse_meta(&fs::read_to_string(tmp.path().join("meta.txt")).unwrap()).unwrap();
    assert_eq!(meta["l1_error"], "0");
}

#[test]
fn run_prints_days_epochs_and_counters() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path().to_str().unwrap();
    generate(tmp.path(), "counter", "uniform");
    let out = dynpred(&["run", "--problem", "counter", "--dir", d]);
    let text = String::from_utf8(out.stdout).unwrap();
    let days: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(days.len(), 64);
    assert!(days[0].starts_with("1 "));
    assert!(text.contains("# retrigger_units="));

    let out = dynpred(&["run", "--problem", "counter", "--dir", d, "--mode", "boosted"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let epochs: Vec<&str> = text.lines().filter(|l| l.starts_with("#epoch")).collect();
    assert_eq!(epochs.len(), 7);
    assert!(epochs[0].starts_with("#epoch T\u{302}=2 L="), "{}", epochs[0]);
}

#[test]
fn bad_input_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    generate(d, "counter", "uniform");
    let stream = fs::read_to_string(d.join("stream.txt")).unwrap();
    let broken: Vec<String> =
        stream.lines().enumerate().map(|(i, l)| if i == 4 { "5 3 X".to_string() } else { l.to_string() }).collect();
    fs::write(d.join("stream.txt"), broken.join("\n")).unwrap();
    let out = dynpred(&["verify", "--problem", "counter", "--dir", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 5"));

    let out = dynpred(&["run", "--problem", "nope", "--dir", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = dynpred(&["generate", "--problem", "counter", "--model", "adversarial-uneven", "--T", "30", "--n", "4", "--out", d.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_writes_the_csv_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("bench.csv");
    let out = dynpred(&["bench", "--T", "128", "--n", "16", "--seeds", "2", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,T,l1_error,preprocess_units,retrigger_units,total_units,reschedules,depth");
    assert_eq!(lines.len(), 1 + 4 * 2);
}
