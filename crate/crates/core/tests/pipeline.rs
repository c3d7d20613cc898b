use std::fs;
use std::path::{Path, PathBuf};

use lpds_core::acoustic::encode_wav_pcm16;
use lpds_core::derivatives::{normalize_timestamps, validate_derivatives, EventStatus};
use lpds_core::pipeline::{discover_config, run_pipeline, DiscoveryError, RunError, RunOptions};
use lpds_core::{parse_name, Severity};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/projects/fluency")
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

fn project() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(&fixture(), dir.path());
    dir
}

fn run(root: &Path, jobs: usize) -> lpds_core::pipeline::RunReport {
    run_pipeline(&RunOptions {
        root: root.to_path_buf(),
        config_path: root.join("config.yml"),
        jobs: Some(jobs),
    })
    .unwrap()
}

/// Relative path → contents, timestamps normalized.
fn snapshot(root: &Path) -> Vec<(String, String)> {
    fn walk(base: &Path, dir: &Path, out: &mut Vec<(String, String)>) {
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(base, &path, out);
            } else {
                let rel = path.strip_prefix(base).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, normalize_timestamps(&fs::read_to_string(&path).unwrap())));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, &root.join("derivatives"), &mut out);
    out.sort();
    out
}

#[test]
fn fluency_fixture_outputs() {
    let dir = project();
    let report = run(dir.path(), 2);
    assert_eq!(report.failed(), 0);
    assert_eq!(report.files.len(), 3, "filters keep the three animal lists");
    assert!(report.files.iter().all(|f| f.status == EventStatus::Ok), "{:?}", report.files);

    let snap = snapshot(dir.path());
    let names: Vec<&str> = snap.iter().map(|(p, _)| p.as_str()).collect();
    assert!(names.contains(
        &"derivatives/preprocessing/part-01_task-fluency_cat-semantic_acq-animals_proc-cleaned_text.txt"
    ));
    assert!(names.contains(
        &"derivatives/similarity/part-01_task-fluency_cat-semantic_acq-animals_metric-similarity_model-animalsmini_description-window.csv"
    ));
    assert!(names.contains(&"derivatives/logs/pelican_log.txt"));

    let cleaned = &snap
        .iter()
        .find(|(p, _)| p.ends_with("part-01_task-fluency_cat-semantic_acq-animals_proc-cleaned_text.txt"))
        .unwrap()
        .1;
    assert_eq!(
        cleaned,
        "dog\ncat\nhorse\ncow\npig\nsheep\ngoat\nlion\ntiger\nbear\nwolf\nfox\nrabbit\n"
    );

    let similarity = &snap
        .iter()
        .find(|(p, _)| p.starts_with("derivatives/aggregations/") && p.contains("description-window"))
        .unwrap()
        .1;
    let lines: Vec<&str> = similarity.lines().collect();
    assert_eq!(lines[0], "part,ses,task,tokens,oov_count,count,skipped,mean,sd,min,max");
    assert_eq!(lines.len(), 4);
    // part-02 lists "unicorn", which has no vector
    assert!(lines[2].starts_with("02,,fluency,16,1,"), "{}", lines[2]);
}

#[test]
fn every_output_revalidates() {
    let dir = project();
    let report = run(dir.path(), 4);
    let diags = validate_derivatives(dir.path()).unwrap();
    let errors: Vec<_> = diags.iter().filter(|d| d.severity == Severity::Error).collect();
    assert!(errors.is_empty(), "{errors:?}");
    for out in &report.outputs {
        let name = out.file_name().unwrap().to_str().unwrap();
        assert!(parse_name(name).is_ok(), "{name}");
    }
}

#[test]
fn repeat_and_jobs_give_identical_trees() {
    let a = project();
    let b = project();
    run(a.path(), 1);
    let first = snapshot(a.path());
    run(a.path(), 1);
    assert_eq!(first, snapshot(a.path()));
    run(b.path(), 8);
    assert_eq!(first, snapshot(b.path()));
}

#[test]
fn invalid_tree_aborts_before_processing() {
    let dir = project();
    fs::create_dir_all(dir.path().join("participants/bad-folder/fluency")).unwrap();
    let err = run_pipeline(&RunOptions {
        root: dir.path().to_path_buf(),
        config_path: dir.path().join("config.yml"),
        jobs: Some(1),
    })
    .unwrap_err();
    assert!(matches!(err, RunError::InvalidTree(_)));
    assert!(!dir.path().join("derivatives").exists());
}

#[test]
fn discovery_rule() {
    let dir = project();
    assert_eq!(discover_config(dir.path()).unwrap(), dir.path().join("config.yml"));
    fs::write(dir.path().join("other.yaml"), "").unwrap();
    assert!(matches!(discover_config(dir.path()), Err(DiscoveryError::Ambiguous { .. })));
    let empty = tempfile::tempdir().unwrap();
    assert!(matches!(discover_config(empty.path()), Err(DiscoveryError::NotFound(_))));
}

#[test]
fn unreadable_file_fails_alone() {
    let dir = project();
    let bad = dir
        .path()
        .join("participants/part-02/fluency/part-02_task-fluency_cat-semantic_acq-animals_transcript.txt");
    fs::write(&bad, [0xff, 0xfe, 0x00]).unwrap();
    let report = run(dir.path(), 2);
    assert_eq!(report.failed(), 1);
    let log = fs::read_to_string(dir.path().join("derivatives/logs/pelican_log.txt")).unwrap();
    assert!(log.contains("summary: 2 processed, 1 failed"), "{log}");
}

#[test]
fn acoustic_metric_on_generated_audio() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let task = root.join("participants/part-01/reading");
    fs::create_dir_all(&task).unwrap();
    let rate = 16_000;
    let tone: Vec<f64> = (0..rate)
        .map(|i| 0.5 * (std::f64::consts::TAU * 120.0 * i as f64 / rate as f64).sin())
        .collect();
    fs::write(task.join("part-01_task-reading_recording.wav"), encode_wav_pcm16(&tone, 1, rate as u32)).unwrap();
    fs::write(
        root.join("voice.yml"),
        "config_name: voice\ninput:\n  extensions: [wav]\nmetrics:\n  - kind: acoustic\n    params:\n      emit_tracks: true\n",
    )
    .unwrap();
    let report = run_pipeline(&RunOptions {
        root: root.to_path_buf(),
        config_path: root.join("voice.yml"),
        jobs: None,
    })
    .unwrap();
    assert_eq!(report.failed(), 0, "{:?}", report.files);
    let summary = fs::read_to_string(
        root.join("derivatives/acoustic/part-01_task-reading_metric-acoustic_description-summary.csv"),
    )
    .unwrap();
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let f0: f64 = row[0].parse().unwrap();
    assert!((f0 - 120.0).abs() < 1.0, "{summary}");
    assert!(root
        .join("derivatives/acoustic/part-01_task-reading_metric-acoustic_description-track.csv")
        .exists());
    assert!(validate_derivatives(root).unwrap().iter().all(|d| d.severity != Severity::Error));
}
