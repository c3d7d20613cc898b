use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lpds(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpds")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

fn fluency_project() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixtures().join("projects/fluency"), dir.path());
    dir
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn inspect_reference_name() {
    let out = lpds(&["inspect", "part-12_task-fluency_cat-semantic_acq-animals_transcript.txt"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    for (key, value) in [("part", "12"), ("task", "fluency"), ("cat", "semantic"), ("acq", "animals")] {
        assert!(
            text.lines().any(|l| l.split_whitespace().skip(1).eq([key, value])),
            "{key}={value} missing:\n{text}"
        );
    }
    assert!(text.contains("suffix: transcript"));
    assert!(text.contains("extension: txt"));
}

#[test]
fn inspect_parse_error() {
    let out = lpds(&["inspect", "noentities.txt"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("parse error"));
}

#[test]
fn inspect_order_hint() {
    let out = lpds(&["inspect", "task-fluency_part-01.txt"]);
    let text = stdout(&out);
    assert!(text.contains("W020") && text.contains("part first"), "{text}");
}

#[test]
fn validate_exit_codes() {
    let pristine = fixtures().join("validator/fluency-study");
    assert_eq!(code(&lpds(&["validate", s(&pristine)])), 0);
    let broken = fixtures().join("validator/e001-no-participants");
    let out = lpds(&["validate", s(&broken)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("E001"));
    let warned = fixtures().join("validator/w022-uncommon-suffix");
    assert_eq!(code(&lpds(&["validate", s(&warned)])), 0);
    assert_eq!(code(&lpds(&["validate", "--strict", s(&warned)])), 1);
    assert_eq!(code(&lpds(&["validate", "/nonexistent/lpds/root"])), 2);
}

#[test]
fn validate_json_matches_text() {
    let root = fixtures().join("validator/seeded-violations");
    let text = stdout(&lpds(&["validate", s(&root)]));
    let json: serde_json::Value = serde_json::from_str(&stdout(&lpds(&["validate", "--report", "json", s(&root)]))).unwrap();
    let mut from_json: Vec<String> = json["diagnostics"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d["code"].as_str().unwrap().to_string())
        .collect();
    let mut from_text: Vec<String> = text
        .lines()
        .filter_map(|l| l.split_whitespace().nth(1))
        .filter(|c| c.len() == 4 && c[1..].chars().all(|ch| ch.is_ascii_digit()))
        .map(str::to_string)
        .collect();
    from_json.sort();
    from_text.sort();
    assert_eq!(from_json, from_text);
    assert!(json["lpds_validator_version"].is_string());
}

#[test]
fn init_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("study");
    let out = lpds(&["init", s(&root), "-n", "3", "--sessions", "2", "--task", "fluency,interview"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(root.join("participants/part-03/ses-02/interview").is_dir());
    let out = lpds(&["validate", "--strict", s(&root)]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    // a second init into the now non-empty root is refused
    assert_eq!(code(&lpds(&["init", s(&root), "--task", "fluency"])), 2);
}

#[test]
fn run_fluency_fixture() {
    let dir = fluency_project();
    let out = lpds(&["run", "--root", s(dir.path())]);
    assert_eq!(code(&out), 0, "{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("derivatives/logs/pelican_log.txt").is_file());
    assert!(dir.path().join("derivatives/aggregations").is_dir());
    let out = lpds(&["validate", "--derivatives", s(dir.path())]);
    assert_eq!(code(&out), 0);
}

#[test]
fn run_needs_one_config() {
    let dir = fluency_project();
    fs::copy(dir.path().join("config.yml"), dir.path().join("second.yml")).unwrap();
    let out = lpds(&["run", "--root", s(dir.path())]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("config.yml") && err.contains("second.yml"), "{err}");
    let out = lpds(&["run", "--root", s(dir.path()), "--config", s(&dir.path().join("second.yml"))]);
    assert_eq!(code(&out), 0);
}

#[test]
fn run_failure_codes() {
    let dir = fluency_project();
    let file = dir
        .path()
        .join("participants/part-01/fluency/part-01_task-fluency_cat-semantic_acq-animals_transcript.txt");
    fs::write(&file, [0xc3, 0x28]).unwrap();
    assert_eq!(code(&lpds(&["run", "--root", s(dir.path())])), 3);

    fs::create_dir_all(dir.path().join("participants/subject-9/fluency")).unwrap();
    assert_eq!(code(&lpds(&["run", "--root", s(dir.path())])), 1);

    let bad_config = fluency_project();
    fs::write(bad_config.path().join("config.yml"), "input:\n  extensions: [txt]\n").unwrap();
    assert_eq!(code(&lpds(&["run", "--root", s(bad_config.path())])), 2);
    assert_eq!(code(&lpds(&["run", "--root", s(bad_config.path()), "--jobs", "0"])), 2);
}

#[test]
fn usage_error_is_two() {
    assert_eq!(code(&lpds(&["frobnicate"])), 2);
    assert_eq!(code(&lpds(&["validate", "--report", "xml"])), 2);
}
