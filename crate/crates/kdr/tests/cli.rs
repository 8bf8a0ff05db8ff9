use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use kdr::doc::{ModelFile, RunDocument};
use serde_json::Value;

fn kdr(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdr")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = kdr(dir, args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn gen(dir: &Path, dataset: &str, n: &str, seed: &str, out: &str) {
    ok(dir, &["gen", "--dataset", dataset, "--n-per-class", n, "--seed", seed, "--out", out, "--doc", "gen.json"]);
}

fn doc(path: PathBuf) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_deterministic_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "swiss-roll", "150", "3", "a.csv");
    gen(d, "swiss-roll", "150", "3", "b.csv");
    let a = fs::read(d.join("a.csv")).unwrap();
    assert_eq!(a, fs::read(d.join("b.csv")).unwrap());
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("f0,f1,f2,label"));
    assert_eq!(lines.count(), 600);
    gen(d, "swiss-roll", "150", "4", "c.csv");
    assert_ne!(fs::read(d.join("c.csv")).unwrap(), fs::read(d.join("a.csv")).unwrap());
}

#[test]
fn fit_transform_classify_roc() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "wine_chocolate", "40", "1", "train.csv");
    gen(d, "wine_chocolate", "40", "2", "test.csv");
    ok(
        d,
        &["fit", "--method", "klda", "--delta", "0.5", "--in", "train.csv", "--model", "m.json", "--doc", "fit.json"],
    );
    ok(d, &["transform", "--model", "m.json", "--in", "test.csv", "--out", "proj.csv", "--doc", "t.json"]);
    let proj = fs::read_to_string(d.join("proj.csv")).unwrap();
    assert_eq!(proj.lines().next(), Some("p0,label"));
    assert_eq!(proj.lines().count(), 81);

    ok(d, &["classify", "--model", "m.json", "--in", "test.csv", "--out", "pred.csv", "--doc", "c.json"]);
    let report = &doc(d.join("c.json"))["result"]["report"];
    assert!(report["accuracy"].as_f64().unwrap() >= 0.9, "{report}");
    let pred = fs::read_to_string(d.join("pred.csv")).unwrap();
    assert_eq!(pred.lines().next(), Some("label,predicted,score"));

    ok(d, &["roc", "--in", "pred.csv", "--out", "roc.csv", "--doc", "r.json"]);
    let roc = fs::read_to_string(d.join("roc.csv")).unwrap();
    assert!(roc.starts_with("# auc="));
    let auc = doc(d.join("r.json"))["result"]["auc"].as_f64().unwrap();
    assert_eq!(Some(auc), report["auc"].as_f64());
}

#[test]
fn model_file_round_trips_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "apple_tart", "30", "5", "train.csv");
    ok(d, &["fit", "--method", "skpca", "--delta", "0.5", "--in", "train.csv", "--model", "m.json", "--doc", "f.json"]);
    let model = ModelFile::load(&d.join("m.json")).unwrap();
    model.save(&d.join("m2.json")).unwrap();
    assert_eq!(fs::read(d.join("m.json")).unwrap(), fs::read(d.join("m2.json")).unwrap());
    assert_eq!(ModelFile::load(&d.join("m2.json")).unwrap(), model);

    ok(d, &["transform", "--model", "m.json", "--in", "train.csv", "--out", "p1.csv", "--doc", "t.json"]);
    ok(d, &["transform", "--model", "m2.json", "--in", "train.csv", "--out", "p2.csv", "--doc", "t.json"]);
    assert_eq!(fs::read(d.join("p1.csv")).unwrap(), fs::read(d.join("p2.csv")).unwrap());
}

#[test]
fn tune_table_is_ranked() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "wine_chocolate", "30", "1", "a.csv");
    gen(d, "wine_chocolate", "30", "2", "b.csv");
    fs::write(d.join("grid.json"), r#"{"delta":[0.5,1,2],"cost":[0.1,10]}"#).unwrap();
    let args = ["tune", "--method", "kpca", "--grid", "grid.json", "--train", "a.csv", "--test", "b.csv"];
    ok(d, &[&args[..], &["--out", "tune.csv", "--doc", "t.json"]].concat());
    let table = fs::read_to_string(d.join("tune.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("rank,delta,eta,cost,d,accuracy,auc,retained_d,error"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    assert_eq!(rows.len(), 6);
    let acc: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(acc.windows(2).all(|w| w[0] >= w[1]), "{acc:?}");
    let ranks: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ranks, (1..=6).collect::<Vec<_>>());
}

#[test]
fn paper_sign_negates_grid_deltas() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "wine_chocolate", "20", "1", "a.csv");
    fs::write(d.join("grid.json"), r#"{"delta":[-0.5]}"#).unwrap();
    let args =
        ["tune", "--method", "kpca", "--paper-sign", "--grid", "grid.json", "--train", "a.csv", "--test", "a.csv"];
    ok(d, &[&args[..], &["--doc", "t.json"]].concat());
    let rows = &doc(d.join("t.json"))["result"]["rows"];
    assert_eq!(rows[0]["point"]["delta"].as_f64(), Some(0.5));
}

#[test]
fn ensemble_lists_every_worker() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "wine_chocolate", "50", "1", "m1.csv");
    gen(d, "wine_chocolate", "50", "2", "m2.csv");
    let args = ["ensemble", "--method", "kpca", "--train", "m1.csv", "--test", "m2.csv", "--samples", "5"];
    ok(d, &[&args[..], &["--sample-size", "40", "--seed", "9", "--workers", "3", "--doc", "e.json"]].concat());
    let result = &doc(d.join("e.json"))["result"];
    let workers = result["workers"].as_array().unwrap();
    assert_eq!(workers.len(), 5);
    let seeds: Vec<u64> = workers.iter().map(|w| w["seed"].as_u64().unwrap()).collect();
    assert_eq!(seeds, vec![10, 11, 12, 13, 14]);
    assert_eq!(result["report"]["n"].as_u64(), Some(100));
}

#[test]
fn documents_are_byte_identical_without_resources() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "swiss-roll", "20", "1", "a.csv");
    gen(d, "swiss-roll", "20", "2", "b.csv");
    fs::write(d.join("grid.json"), r#"{"delta":[0.5,2],"cost":[1,10]}"#).unwrap();
    let base =
        ["tune", "--method", "klda", "--grid", "grid.json", "--train", "a.csv", "--test", "b.csv", "--no-resources"];
    let one = ok(d, &[&base[..], &["--workers", "1"]].concat()).stdout;
    let three = ok(d, &[&base[..], &["--workers", "3"]].concat()).stdout;
    assert!(!one.is_empty());
    assert_eq!(one, three);
    let with = ok(d, &base[..base.len() - 1]).stdout;
    assert!(String::from_utf8(with).unwrap().contains("wall_time_s"));
}

#[test]
fn rerun_reproduces_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "wine_chocolate", "30", "1", "a.csv");
    ok(d, &["fit", "--method", "kpca", "--in", "a.csv", "--model", "m.json", "--doc", "fit.json"]);
    ok(d, &["rerun", "--from", "fit.json"]);

    let mut tampered = RunDocument::load(&d.join("fit.json")).unwrap();
    tampered.result["train"]["accuracy"] = Value::from(0.123);
    tampered.save(&d.join("bad.json")).unwrap();
    let out = kdr(d, &["rerun", "--from", "bad.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).starts_with("error[RerunMismatch]"), "{}", stderr(&out));
    assert!(stderr(&out).contains("result.train.accuracy"), "{}", stderr(&out));
}

#[test]
fn alternate_and_lopo() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    gen(d, "wine_chocolate", "20", "1", "s1.csv");
    gen(d, "wine_chocolate", "20", "2", "s2.csv");
    gen(d, "wine_chocolate", "10", "3", "r.csv");
    ok(d, &["alternate", "--method", "pca", "--s1", "s1.csv", "--s2", "s2.csv", "--r", "r.csv", "--doc", "a.json"]);
    let result = &doc(d.join("a.json"))["result"];
    let runs = result["runs"].as_array().unwrap();
    assert_eq!(runs.len(), 2);
    assert_eq!(runs[0]["n"].as_u64(), Some(60));
    let mean = (runs[0]["accuracy"].as_f64().unwrap() + runs[1]["accuracy"].as_f64().unwrap()) / 2.0;
    assert_eq!(result["mean"]["accuracy"].as_f64(), Some(mean));

    let mut text = String::from("x,label,subject_id\n");
    for i in 0..12 {
        text.push_str(&format!("{},{},s{}\n", i as f64 * 0.5 + (i % 2) as f64 * 4.0, i % 2, i / 4));
    }
    fs::write(d.join("subjects.csv"), text).unwrap();
    ok(d, &["lopo", "--method", "pca", "--d", "1", "--in", "subjects.csv", "--doc", "l.json"]);
    let folds = doc(d.join("l.json"))["result"]["folds"].as_array().unwrap().len();
    assert_eq!(folds, 3);
}

#[test]
fn errors_are_named_and_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let missing = kdr(d, &["fit", "--method", "pca", "--in", "nope.csv", "--model", "m.json"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(stderr(&missing).starts_with("error[Io]"), "{}", stderr(&missing));

    fs::write(d.join("bad.csv"), "a,b\n1,2\n").unwrap();
    let schema = kdr(d, &["fit", "--method", "pca", "--in", "bad.csv", "--model", "m.json"]);
    assert!(stderr(&schema).starts_with("error[Schema]"), "{}", stderr(&schema));

    gen(d, "wine_chocolate", "10", "1", "a.csv");
    let lopo = kdr(d, &["lopo", "--method", "pca", "--in", "a.csv"]);
    assert!(stderr(&lopo).starts_with("error[MissingSubjectIds]"), "{}", stderr(&lopo));

    let workers = kdr(d, &["--workers", "0", "lopo", "--method", "pca", "--in", "a.csv"]);
    assert!(stderr(&workers).starts_with("error[Usage]"), "{}", stderr(&workers));

    let usage = kdr(d, &["fit", "--method", "nonsense"]);
    assert!(!usage.status.success());
    assert!(!d.join("m.json").exists());
}
