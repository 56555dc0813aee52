//! End-to-end runs of the command-line front end against temporary
//! directories.

use aqec::cli::{run, CodeArtifact};
use aqec::optimizer::ConvergenceLog;
use aqec::{fidelity, uniform_decay};
use std::fs::File;
use std::path::Path;

fn aqec(dir: &Path, args: &[&str]) -> i32 {
    let out = dir.to_str().unwrap();
    let mut argv = vec!["aqec"];
    argv.extend_from_slice(args);
    argv.extend(["--out", out]);
    run(argv)
}

#[test]
fn optimize_artifact_reevaluates_to_logged_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqec(dir.path(), &["optimize", "--code", "random", "--max-iter", "5", "--seed", "3"]), 0);

    let artifact = CodeArtifact::load(&dir.path().join("code.json")).unwrap();
    let code = artifact.to_code().unwrap();
    let f = fidelity(&uniform_decay(4).unwrap(), &code, artifact.metadata.tau).unwrap();
    assert!((f - artifact.metadata.fidelity).abs() <= 1e-12, "{f} vs {}", artifact.metadata.fidelity);

    let history = ConvergenceLog::read_fidelity_history(File::open(dir.path().join("convergence.csv")).unwrap()).unwrap();
    assert_eq!(history.len(), 6);
    assert_eq!(history.last().unwrap().1, artifact.metadata.fidelity);
    assert!(history.windows(2).all(|w| w[1].1 >= w[0].1));
}

#[test]
fn artifact_can_seed_a_further_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqec(dir.path(), &["optimize", "--code", "random", "--max-iter", "2"]), 0);
    let first = CodeArtifact::load(&dir.path().join("code.json")).unwrap();
    let path = dir.path().join("first.json");
    first.save(&path).unwrap();

    let again = tempfile::tempdir().unwrap();
    assert_eq!(aqec(again.path(), &["evaluate", "--code", path.to_str().unwrap()]), 0);
    let report: serde_json::Value =
        serde_json::from_reader(File::open(again.path().join("evaluate.json")).unwrap()).unwrap();
    let f = report["fidelity"].as_f64().unwrap();
    assert!((f - first.metadata.fidelity).abs() <= 1e-12);
}

#[test]
fn evaluate_reports_the_thirteen_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqec(dir.path(), &["evaluate"]), 0);
    let report: serde_json::Value =
        serde_json::from_reader(File::open(dir.path().join("evaluate.json")).unwrap()).unwrap();
    let f = report["fidelity"].as_f64().unwrap();
    assert!((f - 0.9999985).abs() < 1e-7);
}

#[test]
fn seeds_ranking_is_sorted_best_first() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqec(dir.path(), &["seeds", "--seeds", "3", "--max-iter", "3"]), 0);
    let mut reader = csv::Reader::from_path(dir.path().join("ranking.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 3);
    let fid: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(fid.windows(2).all(|w| w[0] >= w[1]), "{fid:?}");
    for r in &rows {
        assert!(dir.path().join(&r[6]).exists());
        assert!(dir.path().join(format!("seed_{}.csv", &r[1])).exists());
    }
}

#[test]
fn sweep_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--model", "photon_loss", "--n", "5", "--code", "binomial", "--values", "0.4", "0.45", "0.5"];
    assert_eq!(aqec(a.path(), &args), 0);
    assert_eq!(aqec(b.path(), &args), 0);
    let left = std::fs::read_to_string(a.path().join("sweep.csv")).unwrap();
    let right = std::fs::read_to_string(b.path().join("sweep.csv")).unwrap();
    assert_eq!(left, right);
    assert_eq!(left.lines().count(), 4);
}

#[test]
fn bad_input_exits_with_status_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(aqec(dir.path(), &["bogus"]), 1);
    assert_eq!(aqec(dir.path(), &["evaluate", "--gamma-ratio=-1"]), 1);
    assert_eq!(aqec(dir.path(), &["evaluate", "--config", "/nonexistent/run.json"]), 1);
    assert_eq!(aqec(dir.path(), &["--help"]), 0);
}
