use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn vvmult(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vvmult"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn same_seed_gives_byte_identical_reports() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["lemma61", "--trials", "4", "--seed", "11"];
    assert_eq!(vvmult(&args, a.path()).status.code(), Some(0));
    assert_eq!(vvmult(&args, b.path()).status.code(), Some(0));
    for name in ["lemma61.json", "lemma61_trend.csv", "lemma61_summary.txt"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let other = tempfile::tempdir().unwrap();
    vvmult(&["lemma61", "--trials", "4", "--seed", "12"], other.path());
    assert_ne!(
        fs::read(a.path().join("lemma61.json")).unwrap(),
        fs::read(other.path().join("lemma61.json")).unwrap()
    );
}

#[test]
fn single_scale_preset_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = vvmult(&["lemma61"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json = fs::read_to_string(dir.path().join("lemma61.json")).unwrap();
    assert!(json.contains("\"schema_version\": 1"));
    assert!(json.contains("\"refinement\": {"));
    assert!(json.contains("\"trials\": 50"));
    let ratios = json
        .split("\"ratios\": [")
        .nth(1)
        .unwrap()
        .split(']')
        .next()
        .unwrap();
    assert_eq!(ratios.split(',').count(), 50);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let zero = vvmult(&["theorem11", "--trials", "0"], dir.path());
    assert_eq!(zero.status.code(), Some(0));
    let json = fs::read_to_string(dir.path().join("theorem11.json")).unwrap();
    assert!(json.contains("\"ensembles\": []"));

    let bad = vvmult(
        &["theorem11", "--p", "0.5", "--q", "inf", "--s", "1.5"],
        dir.path(),
    );
    assert_eq!(bad.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("max(|d/p - d/2|, |d/q - d/2|) < s"));

    let blocked = dir.path().join("file");
    fs::write(&blocked, "").unwrap();
    let io = vvmult(&["partition-check"], &blocked.join("sub"));
    assert_eq!(io.status.code(), Some(3));
}

#[test]
fn validate_reports_the_boundary() {
    let dir = tempfile::tempdir().unwrap();
    let at = vvmult(
        &[
            "validate",
            "theorem11",
            "--p",
            "2",
            "--q",
            "2",
            "--s",
            "0.6",
            "--r",
            "1.6666666666666667",
        ],
        dir.path(),
    );
    assert_eq!(at.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&at.stdout).contains("r > tau^(s,p,q)"));
    let inside = vvmult(
        &[
            "validate",
            "theorem11",
            "--p",
            "2",
            "--q",
            "2",
            "--s",
            "0.6",
            "--r",
            "1.8",
        ],
        dir.path(),
    );
    assert_eq!(inside.status.code(), Some(0));
}

#[test]
fn output_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_vvmult"))
        .args(["partition-check"])
        .env("VVMULT_OUT_DIR", dir.path())
        .output()
        .unwrap()
        .status;
    assert!(status.success());
    assert!(dir.path().join("partition-check_summary.txt").exists());
}
