use std::path::Path;
use std::process::Command;

use treeskel_core::estimate::oracle_estimate;
use treeskel_core::io::{read_cloud, read_skeleton, write_cloud, PlyFormat};
use treeskel_core::model::skeleton_validate;

fn run(args: &[&str]) -> i32 {
    let mut argv = vec!["treeskel"];
    argv.extend_from_slice(args);
    treeskel::run(argv)
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_treeskel"))
}

#[test]
fn generate_then_skeletonize_then_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let (tree, cloud, out, csv) = (
        p(dir.path(), "tree.json"),
        p(dir.path(), "cloud.ply"),
        p(dir.path(), "out.json"),
        p(dir.path(), "r.csv"),
    );
    assert_eq!(
        run(&["generate", "--depth", "3", "--seed", "7", "-o", &tree, "-c", &cloud]),
        0
    );
    let (gt, meta) = read_skeleton(&tree).unwrap();
    assert!(!gt.is_empty());
    assert_eq!(meta.seed, Some(7));
    let c = read_cloud(&cloud).unwrap();
    assert!(c.cloud.labels().is_some());
    assert!(c.field.is_none());

    assert_eq!(run(&["skeletonize", &cloud, "--estimator", "oracle", "-o", &out]), 0);
    let (pred, _) = read_skeleton(&out).unwrap();
    assert!(skeleton_validate(&pred).is_empty());
    assert!(!pred.is_empty());

    let svg = p(dir.path(), "plot.svg");
    assert_eq!(
        run(&["evaluate", "--gt", &tree, "--pred", &out, "-o", &csv, "--plot", &svg]),
        0
    );
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,precision,recall,f1\n"));
    assert_eq!(text.lines().count(), 102);
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<polyline"));
}

#[test]
fn self_evaluation_scores_full_marks() {
    let dir = tempfile::tempdir().unwrap();
    let (tree, cloud, csv, sum) = (
        p(dir.path(), "t.json"),
        p(dir.path(), "c.ply"),
        p(dir.path(), "r.csv"),
        p(dir.path(), "s.json"),
    );
    assert_eq!(
        run(&["generate", "--depth", "2", "--seed", "1", "-o", &tree, "-c", &cloud]),
        0
    );
    let args = [
        "evaluate",
        "--gt",
        &tree,
        "--pred",
        &tree,
        "--prune-radius",
        "0",
        "--prune-length",
        "0",
        "--steps",
        "11",
        "-o",
        &csv,
        "--summary",
        &sum,
    ];
    assert_eq!(run(&args), 0);
    let text = std::fs::read_to_string(&csv).unwrap();
    let last = text.lines().last().unwrap();
    assert_eq!(last, "1,100,100,100");
    let s: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&sum).unwrap()).unwrap();
    assert!((s["f1_auc"].as_f64().unwrap() - 0.95).abs() < 1e-12);
}

#[test]
fn field_estimator_reads_predictions_from_the_cloud() {
    let dir = tempfile::tempdir().unwrap();
    let (tree, cloud, with_field) = (p(dir.path(), "t.json"), p(dir.path(), "c.ply"), p(dir.path(), "f.ply"));
    assert_eq!(
        run(&["generate", "--depth", "2", "--seed", "3", "-o", &tree, "-c", &cloud]),
        0
    );
    let c = read_cloud(&cloud).unwrap().cloud;
    let field = oracle_estimate(&c).unwrap();
    write_cloud(&with_field, &c, Some(&field), PlyFormat::Ascii).unwrap();

    let (a, b) = (p(dir.path(), "a.json"), p(dir.path(), "b.json"));
    // Without voxel averaging the stored field is exactly the oracle's.
    assert_eq!(
        run(&["skeletonize", &cloud, "--estimator", "oracle", "--voxel", "0", "-o", &a]),
        0
    );
    assert_eq!(
        run(&[
            "skeletonize",
            &with_field,
            "--estimator",
            "field",
            "--voxel",
            "0",
            "-o",
            &b
        ]),
        0
    );
    assert_eq!(read_skeleton(&a).unwrap().0, read_skeleton(&b).unwrap().0);
    assert_eq!(run(&["skeletonize", &with_field, "--estimator", "field", "-o", &b]), 0);

    // No predictions stored: a domain error.
    assert_eq!(run(&["skeletonize", &cloud, "--estimator", "field", "-o", &b]), 1);
}

#[test]
fn ascii_and_binary_clouds_agree() {
    let dir = tempfile::tempdir().unwrap();
    let (t, a, b) = (p(dir.path(), "t.json"), p(dir.path(), "a.ply"), p(dir.path(), "b.ply"));
    assert_eq!(
        run(&["generate", "--depth", "1", "--seed", "4", "-o", &t, "-c", &a, "--ascii"]),
        0
    );
    assert_eq!(run(&["generate", "--depth", "1", "--seed", "4", "-o", &t, "-c", &b]), 0);
    assert!(std::fs::read(&a).unwrap().starts_with(b"ply\nformat ascii"));
    assert_eq!(read_cloud(&a).unwrap(), read_cloud(&b).unwrap());
}

#[test]
fn pipeline_writes_artifacts_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let save = p(dir.path(), "run");
    let (a, b) = (p(dir.path(), "a.csv"), p(dir.path(), "b.csv"));
    let base = ["pipeline", "--depth", "3", "--seed", "7", "--noise", "0.002"];
    let mut first = base.to_vec();
    first.extend(["-o", &a, "--save-dir", &save]);
    assert_eq!(run(&first), 0);
    let mut second = base.to_vec();
    second.extend(["-o", &b]);
    assert_eq!(run(&second), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    for f in ["ground_truth.json", "cloud.ply", "skeleton.json"] {
        assert!(Path::new(&save).join(f).exists(), "{f}");
    }
}

#[test]
fn exit_codes() {
    let code = |args: &[&str]| binary().args(args).output().unwrap().status.code();
    assert_eq!(code(&["frobnicate"]), Some(2));
    assert_eq!(code(&["skeletonize"]), Some(2));
    assert_eq!(code(&["generate", "--depth", "x", "-o", "a", "-c", "b"]), Some(2));
    assert_eq!(code(&["skeletonize", "--help"]), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let (t, c) = (p(dir.path(), "t.json"), p(dir.path(), "c.ply"));
    // Out-of-range parameters are domain errors, not flag misuse.
    assert_eq!(run(&["generate", "--length-decay", "1.5", "-o", &t, "-c", &c]), 1);
    assert_eq!(run(&["pipeline", "--dropout", "1"]), 1);
    assert_eq!(run(&["evaluate", "--gt", &t, "--pred", &t]), 1);
}

#[test]
fn domain_errors_are_one_line() {
    let out = binary()
        .args(["skeletonize", "/definitely/missing.ply", "-o", "/tmp/never.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("/definitely/missing.ply"));
}

#[test]
fn help_documents_defaults() {
    for sub in ["generate", "skeletonize", "evaluate", "pipeline"] {
        let out = binary().args([sub, "--help"]).output().unwrap();
        assert!(out.status.success());
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(text.contains("[default:"), "{sub}");
    }
    let text = String::from_utf8(binary().args(["skeletonize", "--help"]).output().unwrap().stdout).unwrap();
    assert!(text.contains("[default: 0.01]"));
    let text = String::from_utf8(binary().args(["evaluate", "--help"]).output().unwrap().stdout).unwrap();
    assert!(text.contains("[default: 0.001]") && text.contains("[default: 101]"));
}
