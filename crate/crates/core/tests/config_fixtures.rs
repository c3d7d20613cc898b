use std::fs;
use std::path::{Path, PathBuf};

use lpds_core::config::{config_fingerprint, load_config, parse_config_str, to_canonical, ConfigError, MetricSpec};
use lpds_core::semantic::SimilarityMode;

fn dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/config")
}

fn outcome(result: Result<lpds_core::config::PipelineConfig, ConfigError>) -> String {
    match result {
        Ok(cfg) => format!("ok {}", config_fingerprint(&cfg)),
        Err(ConfigError::TabIndentation { line }) => format!("tab-indentation {line}"),
        Err(ConfigError::UnknownKey { path, .. }) => format!("unknown-key {path}"),
        Err(ConfigError::InvalidValue { path, .. }) => format!("invalid-value {path}"),
        Err(ConfigError::MissingRequired(path)) => format!("missing-required {path}"),
        Err(ConfigError::Syntax { line, .. }) => format!("syntax {line}"),
        Err(e) => format!("other {e}"),
    }
}

#[test]
fn every_fixture_loads_or_fails_as_documented() {
    let expected = fs::read_to_string(dir().join("expected.txt")).unwrap();
    let mut listed = Vec::new();
    for line in expected.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let (file, want) = line.split_once(char::is_whitespace).unwrap();
        assert_eq!(outcome(load_config(&dir().join(file))), want.trim(), "{file}");
        listed.push(file.to_string());
    }
    for entry in fs::read_dir(dir()).unwrap() {
        let name = entry.unwrap().file_name().to_string_lossy().into_owned();
        if name.ends_with(".yml") {
            assert!(listed.contains(&name), "{name} has no documented outcome");
        }
    }
}

#[test]
fn sample_fields() {
    let cfg = load_config(&dir().join("sample-fluency.yml")).unwrap();
    let fluency = cfg.cleaning.fluency.as_ref().unwrap();
    assert!(fluency.drop_duplicates);
    assert_eq!(fluency.filler_words, ["um", "uh"]);
    assert!(cfg.cleaning.flags.remove_timestamps && cfg.cleaning.flags.lowercase);
    assert_eq!(cfg.metrics.len(), 1);
    let MetricSpec::Similarity(p) = &cfg.metrics[0] else {
        panic!("expected a similarity metric")
    };
    assert_eq!((p.mode, p.window_size), (SimilarityMode::Window, 8));
}

#[test]
fn fingerprint_ignores_location_and_layout() {
    let original = load_config(&dir().join("sample-fluency.yml")).unwrap();
    let elsewhere = tempfile::tempdir().unwrap();
    fs::create_dir(elsewhere.path().join("vectors")).unwrap();
    fs::copy(dir().join("vectors/mini.txt"), elsewhere.path().join("vectors/mini.txt")).unwrap();
    let src = fs::read_to_string(dir().join("sample-fluency.yml")).unwrap();
    let reflowed = src.replace("\n", "\r\n").replace("[um, uh]", "\n      - um\n      - uh");
    let moved = parse_config_str(&reflowed, elsewhere.path()).unwrap();
    assert_eq!(config_fingerprint(&original), config_fingerprint(&moved));

    let canonical = to_canonical(&original);
    let reparsed = parse_config_str(&canonical, &dir()).unwrap();
    assert_eq!(to_canonical(&reparsed), canonical);
}
