//! The derivatives tree: output naming, atomic writes, CSV tables,
//! aggregation and run logs.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use regex::Regex;
use serde::Serialize;
use thiserror::Error;

use crate::config::OverwritePolicy;
use crate::dataset::DERIVATIVES_DIR;
use crate::diagnostic::{Diagnostic, Severity};
use crate::name::{parse_name, validate_name, Entity, LpdsName, NameError, NameProfile, PROCESSING_KEYS};

pub const PREPROCESSING_DIR: &str = "preprocessing";
pub const AGGREGATIONS_DIR: &str = "aggregations";
pub const LOGS_DIR: &str = "logs";
pub const LOG_FILE: &str = "pelican_log.txt";
pub const SUMMARY_FILE: &str = "processing_summary.txt";

/// Entities dropped when rows from different recordings are aggregated.
const PER_RECORDING_KEYS: [&str; 3] = ["part", "ses", "run"];

#[derive(Debug, Error)]
pub enum DerivativesError {
    #[error("entity `{0}` is already present in the input name")]
    DuplicateKey(String),
    #[error("`{0}` is not a processing entity (expected one of proc, metric, model, param, description)")]
    NotProcessingKey(String),
    #[error(transparent)]
    Name(#[from] NameError),
    #[error("{0} already exists and the overwrite policy is `error`")]
    AlreadyExists(PathBuf),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot aggregate `{first}` rows with `{second}` rows")]
    MixedMetricKinds { first: String, second: String },
    #[error("row has {got} cells but the table has {expected} columns")]
    RowArity { expected: usize, got: usize },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DerivativesError + '_ {
    move |source| DerivativesError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Category {
    Preprocessing,
    /// Directory named after the metric, e.g. `similarity`.
    Metric(String),
    Aggregations,
    Logs,
}

impl Category {
    pub fn dir_name(&self) -> &str {
        match self {
            Category::Preprocessing => PREPROCESSING_DIR,
            Category::Metric(m) => m,
            Category::Aggregations => AGGREGATIONS_DIR,
            Category::Logs => LOGS_DIR,
        }
    }

    /// Naming profile for files in this category; logs are exempt.
    pub fn profile(&self) -> Option<NameProfile> {
        match self {
            Category::Preprocessing | Category::Metric(_) => Some(NameProfile::Derivative),
            Category::Aggregations => Some(NameProfile::Aggregation),
            Category::Logs => None,
        }
    }

    pub fn from_dir_name(dir: &str) -> Category {
        match dir {
            PREPROCESSING_DIR => Category::Preprocessing,
            AGGREGATIONS_DIR => Category::Aggregations,
            LOGS_DIR => Category::Logs,
            other => Category::Metric(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DerivativePath {
    pub category: Category,
    pub name: LpdsName,
}

impl DerivativePath {
    pub fn new(category: Category, name: LpdsName) -> Self {
        Self { category, name }
    }

    /// `derivatives/<category>/<name>`, relative to the project root.
    pub fn relative(&self) -> PathBuf {
        Path::new(DERIVATIVES_DIR).join(self.category.dir_name()).join(self.name.to_string())
    }

    pub fn resolve(&self, root: &Path) -> PathBuf {
        root.join(self.relative())
    }
}

/// Adds processing entities to `input`, replaces suffix and extension and
/// returns the canonical result.
pub fn derive_name(
    input: &LpdsName,
    additions: &[Entity],
    suffix: Option<&str>,
    extension: &str,
) -> Result<LpdsName, DerivativesError> {
    let mut name = input.clone();
    for e in additions {
        if !PROCESSING_KEYS.contains(&e.key()) {
            return Err(DerivativesError::NotProcessingKey(e.key().to_string()));
        }
        if name.has(e.key()) {
            return Err(DerivativesError::DuplicateKey(e.key().to_string()));
        }
        name.push(e.clone())?;
    }
    Ok(name.with_suffix(suffix.map(str::to_string))?.with_extension(extension)?.canonicalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WriteOutcome {
    Written,
    Skipped,
}

fn temp_path(target: &Path) -> PathBuf {
    let name = target.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    target.with_file_name(format!(".{name}.tmp-{}", std::process::id()))
}

/// Writes through a hidden temporary file in the target directory, then
/// renames it into place. `before_rename` runs between the two steps; if it
/// fails the temporary file is removed and the target is left untouched.
pub fn write_atomic_with(
    target: &Path,
    bytes: &[u8],
    before_rename: impl FnOnce(&Path) -> io::Result<()>,
) -> Result<(), DerivativesError> {
    if let Some(dir) = target.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let tmp = temp_path(target);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        drop(f);
        before_rename(&tmp)?;
        fs::rename(&tmp, target)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io_err(target))
}

pub fn write_atomic(target: &Path, bytes: &[u8]) -> Result<(), DerivativesError> {
    write_atomic_with(target, bytes, |_| Ok(()))
}

pub fn write_output(
    root: &Path,
    path: &DerivativePath,
    bytes: &[u8],
    policy: OverwritePolicy,
) -> Result<WriteOutcome, DerivativesError> {
    let target = path.resolve(root);
    if target.exists() {
        match policy {
            OverwritePolicy::Skip => return Ok(WriteOutcome::Skipped),
            OverwritePolicy::Error => return Err(DerivativesError::AlreadyExists(path.relative())),
            OverwritePolicy::Overwrite => {}
        }
    }
    write_atomic(&target, bytes)?;
    Ok(WriteOutcome::Written)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ColumnKind {
    String,
    Real,
    Integer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
}

impl Column {
    pub fn new(name: impl Into<String>, kind: ColumnKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

/// Missing numbers render as empty cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Cell {
    Str(String),
    Real(Option<f64>),
    Int(Option<i64>),
}

impl Cell {
    pub fn render(&self, decimals: usize) -> String {
        match self {
            Cell::Str(s) => quote_csv(s),
            Cell::Real(Some(v)) if v.is_finite() => format_real(*v, decimals),
            Cell::Int(Some(v)) => v.to_string(),
            _ => String::new(),
        }
    }
}

fn format_real(v: f64, decimals: usize) -> String {
    let s = format!("{v:.decimals$}");
    // keep rounding from printing "-0.000"
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn quote_csv(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub tool_version: String,
    pub config_fingerprint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureTable {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<Cell>>,
    pub provenance: Option<Provenance>,
}

impl FeatureTable {
    pub fn new(columns: Vec<Column>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            provenance: None,
        }
    }

    pub fn push_row(&mut self, row: Vec<Cell>) -> Result<(), DerivativesError> {
        if row.len() != self.columns.len() {
            return Err(DerivativesError::RowArity {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// UTF-8, LF line ends, comma separated, header row first, quoting only
    /// where needed, reals with `decimals` fixed decimals.
    pub fn to_csv(&self, decimals: usize) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|c| quote_csv(&c.name)).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.render(decimals)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// One per-file summary destined for an aggregation table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    /// Name of the per-file output the summary came from.
    pub name: LpdsName,
    /// Values aligned with the aggregation's field columns.
    pub values: Vec<Cell>,
}

/// Builds one table row per summary: `part, ses, task`, then `group_keys`,
/// then `fields`. Rows are sorted by `(part, ses, task)` and then by the
/// full name, so the result does not depend on input order.
pub fn aggregate(rows: &[SummaryRow], group_keys: &[String], fields: &[Column]) -> Result<FeatureTable, DerivativesError> {
    if let Some(first) = rows.first() {
        let kind = first.name.get("metric").unwrap_or("");
        if let Some(other) = rows.iter().find(|r| r.name.get("metric").unwrap_or("") != kind) {
            return Err(DerivativesError::MixedMetricKinds {
                first: kind.to_string(),
                second: other.name.get("metric").unwrap_or("").to_string(),
            });
        }
    }
    let mut columns: Vec<Column> = ["part", "ses", "task"].iter().map(|k| Column::new(*k, ColumnKind::String)).collect();
    let extra: Vec<&String> = group_keys.iter().filter(|k| !["part", "ses", "task"].contains(&k.as_str())).collect();
    columns.extend(extra.iter().map(|k| Column::new(k.as_str(), ColumnKind::String)));
    columns.extend(fields.iter().cloned());

    let mut sorted: Vec<&SummaryRow> = rows.iter().collect();
    let key = |r: &SummaryRow| {
        let get = |k: &str| r.name.get(k).unwrap_or("").to_string();
        (get("part"), get("ses"), get("task"), r.name.to_string())
    };
    sorted.sort_by_cached_key(|r| key(r));

    let mut table = FeatureTable::new(columns);
    for r in sorted {
        let mut cells: Vec<Cell> = ["part", "ses", "task"]
            .iter()
            .map(|k| Cell::Str(r.name.get(k).unwrap_or("").to_string()))
            .collect();
        cells.extend(extra.iter().map(|k| Cell::Str(r.name.get(k).unwrap_or("").to_string())));
        cells.extend(r.values.iter().cloned());
        table.push_row(cells)?;
    }
    Ok(table)
}

/// Name of the aggregation file: entities shared by every input name except
/// part, ses and run, or `identity` when there are no rows, followed by
/// `results-aggregated` and the `table` suffix.
pub fn aggregation_name(rows: &[SummaryRow], identity: &[Entity]) -> Result<LpdsName, DerivativesError> {
    let shared: Vec<Entity> = match rows.split_first() {
        Some((first, rest)) => first
            .name
            .entities()
            .iter()
            .filter(|e| !PER_RECORDING_KEYS.contains(&e.key()))
            .filter(|e| rest.iter().all(|r| r.name.get(e.key()) == Some(e.value())))
            .cloned()
            .collect(),
        None => identity.to_vec(),
    };
    let mut name = LpdsName::new(shared, Some("table".into()), "csv")?;
    name.push(Entity::new("results", "aggregated")?)?;
    Ok(name.canonicalize())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventStatus {
    Ok,
    Skipped,
    Warning,
    Failed,
}

impl EventStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            EventStatus::Ok => "OK",
            EventStatus::Skipped => "SKIPPED",
            EventStatus::Warning => "WARNING",
            EventStatus::Failed => "FAILED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogEvent {
    pub timestamp: DateTime<Utc>,
    pub status: EventStatus,
    /// Input path relative to the project root, or `run` for run-level events.
    pub subject: String,
    pub message: String,
}

/// Per-file line of `processing_summary.txt`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileStatus {
    pub input: String,
    pub status: EventStatus,
    pub outputs: Vec<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMeta {
    pub tool_version: String,
    pub config_name: String,
    pub config_fingerprint: String,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
}

pub fn format_timestamp(t: &DateTime<Utc>) -> String {
    t.to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Replaces every ISO-8601 UTC timestamp with `<timestamp>`.
pub fn normalize_timestamps(text: &str) -> String {
    let re = Regex::new(r"\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(?:\.\d+)?Z").unwrap();
    re.replace_all(text, "<timestamp>").into_owned()
}

pub fn render_log(meta: &RunMeta, events: &[LogEvent], files: &[FileStatus]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# pelican_log");
    let _ = writeln!(out, "tool_version: lpds {}", meta.tool_version);
    let _ = writeln!(out, "config_name: {}", meta.config_name);
    let _ = writeln!(out, "config_fingerprint: {}", meta.config_fingerprint);
    let _ = writeln!(out, "started: {}", format_timestamp(&meta.started));
    for e in events {
        let _ = writeln!(
            out,
            "{} {:<7} {}: {}",
            format_timestamp(&e.timestamp),
            e.status.as_str(),
            e.subject,
            e.message
        );
    }
    let _ = writeln!(out, "finished: {}", format_timestamp(&meta.finished));
    let failed = files.iter().filter(|f| f.status == EventStatus::Failed).count();
    let _ = writeln!(out, "summary: {} processed, {failed} failed", files.len() - failed);
    out
}

pub fn render_summary(meta: &RunMeta, files: &[FileStatus]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# processing summary for {} ({})", meta.config_name, meta.config_fingerprint);
    out.push_str("status\tinput\toutputs\tmessage\n");
    for f in files {
        let outputs = if f.outputs.is_empty() { "-".to_string() } else { f.outputs.join(" ") };
        let _ = writeln!(out, "{}\t{}\t{}\t{}", f.status.as_str(), f.input, outputs, f.message);
    }
    out
}

/// Writes `pelican_log.txt` and `processing_summary.txt` under
/// `derivatives/logs`, replacing earlier logs.
pub fn write_log(root: &Path, meta: &RunMeta, events: &[LogEvent], files: &[FileStatus]) -> Result<(), DerivativesError> {
    let dir = root.join(DERIVATIVES_DIR).join(LOGS_DIR);
    write_atomic(&dir.join(LOG_FILE), render_log(meta, events, files).as_bytes())?;
    write_atomic(&dir.join(SUMMARY_FILE), render_summary(meta, files).as_bytes())
}

/// Checks every file below `derivatives/` against its category's naming
/// profile. Paths in the diagnostics are relative to the project root.
pub fn validate_derivatives(root: &Path) -> Result<Vec<Diagnostic>, DerivativesError> {
    let base = root.join(DERIVATIVES_DIR);
    let mut diags = Vec::new();
    if !base.is_dir() {
        return Ok(diags);
    }
    let mut categories: Vec<_> = fs::read_dir(&base).map_err(io_err(&base))?.filter_map(Result::ok).collect();
    categories.sort_by_key(|e| e.file_name());
    for cat in categories {
        let dir_name = cat.file_name().to_string_lossy().into_owned();
        if dir_name.starts_with('.') || !cat.path().is_dir() {
            continue;
        }
        let category = Category::from_dir_name(&dir_name);
        let Some(profile) = category.profile() else {
            continue;
        };
        let mut files: Vec<_> = fs::read_dir(cat.path()).map_err(io_err(&cat.path()))?.filter_map(Result::ok).collect();
        files.sort_by_key(|e| e.file_name());
        for f in files {
            let file_name = f.file_name().to_string_lossy().into_owned();
            if file_name.starts_with('.') {
                continue;
            }
            let rel = format!("{DERIVATIVES_DIR}/{dir_name}/{file_name}");
            match parse_name(&file_name) {
                Ok(name) => diags.extend(validate_name(&name, profile, &rel)),
                Err(e) => diags.push(Diagnostic::new(
                    crate::diagnostic::Code::E010,
                    rel,
                    format!("not an LPDS name: {e}"),
                )),
            }
        }
    }
    Ok(diags)
}

pub fn error_count(diags: &[Diagnostic]) -> usize {
    diags.iter().filter(|d| d.severity == Severity::Error).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn n(s: &str) -> LpdsName {
        parse_name(s).unwrap()
    }

    fn e(k: &str, v: &str) -> Entity {
        Entity::new(k, v).unwrap()
    }

    #[test]
    fn derive_examples() {
        let input = n("part-01_task-interview_transcript.txt");
        let cleaned = derive_name(&input, &[e("proc", "cleaned")], Some("text"), "txt").unwrap();
        assert_eq!(cleaned.to_string(), "part-01_task-interview_proc-cleaned_text.txt");

        let emb = derive_name(
            &input,
            &[e("description", "mean"), e("metric", "embeddings"), e("model", "glove")],
            None,
            "csv",
        )
        .unwrap();
        assert_eq!(emb.to_string(), "part-01_task-interview_metric-embeddings_model-glove_description-mean.csv");
        assert_eq!(parse_name(&emb.to_string()).unwrap(), emb);

        assert!(matches!(
            derive_name(&cleaned, &[e("proc", "again")], None, "txt"),
            Err(DerivativesError::DuplicateKey(k)) if k == "proc"
        ));
        assert!(matches!(
            derive_name(&input, &[e("acq", "x")], None, "txt"),
            Err(DerivativesError::NotProcessingKey(_))
        ));
    }

    #[test]
    fn derived_names_validate_cleanly() {
        let input = n("part-01_ses-2_task-fluency_cat-semantic_acq-animals_run-1_transcript.txt");
        let name = derive_name(&input, &[e("metric", "similarity"), e("model", "glove"), e("description", "window")], None, "csv").unwrap();
        let diags = validate_name(&name, NameProfile::Derivative, "x");
        assert_eq!(error_count(&diags), 0, "{diags:?}");
    }

    #[test]
    fn write_policies() {
        let dir = tempfile::tempdir().unwrap();
        let path = DerivativePath::new(Category::Preprocessing, n("part-01_task-a_proc-cleaned_text.txt"));
        assert_eq!(write_output(dir.path(), &path, b"one", OverwritePolicy::Error).unwrap(), WriteOutcome::Written);
        let target = path.resolve(dir.path());
        assert_eq!(fs::read(&target).unwrap(), b"one");
        assert_eq!(write_output(dir.path(), &path, b"two", OverwritePolicy::Skip).unwrap(), WriteOutcome::Skipped);
        assert_eq!(fs::read(&target).unwrap(), b"one");
        assert!(matches!(
            write_output(dir.path(), &path, b"two", OverwritePolicy::Error),
            Err(DerivativesError::AlreadyExists(_))
        ));
        write_output(dir.path(), &path, b"three", OverwritePolicy::Overwrite).unwrap();
        assert_eq!(fs::read(&target).unwrap(), b"three");
        assert_eq!(
            path.relative(),
            Path::new("derivatives/preprocessing/part-01_task-a_proc-cleaned_text.txt")
        );
    }

    #[test]
    fn crash_before_rename_leaves_no_target() {
        let dir = tempfile::tempdir().unwrap();
        let target = dir.path().join("derivatives/similarity/out.csv");
        let err = write_atomic_with(&target, b"partial", |tmp| {
            assert!(tmp.exists());
            Err(io::Error::other("injected crash"))
        });
        assert!(err.is_err());
        assert!(!target.exists());
        let leftovers = fs::read_dir(target.parent().unwrap()).unwrap().count();
        assert_eq!(leftovers, 0);
    }

    #[test]
    fn csv_dialect() {
        let mut t = FeatureTable::new(vec![
            Column::new("name", ColumnKind::String),
            Column::new("x", ColumnKind::Real),
            Column::new("n", ColumnKind::Integer),
        ]);
        t.push_row(vec![Cell::Str("a,b".into()), Cell::Real(Some(0.5)), Cell::Int(Some(3))]).unwrap();
        t.push_row(vec![Cell::Str("say \"hi\"".into()), Cell::Real(Some(-0.0000001)), Cell::Int(None)]).unwrap();
        t.push_row(vec![Cell::Str("plain".into()), Cell::Real(None), Cell::Int(Some(-2))]).unwrap();
        assert_eq!(
            t.to_csv(3),
            "name,x,n\n\"a,b\",0.500,3\n\"say \"\"hi\"\"\",0.000,\nplain,,-2\n"
        );
        assert!(t.push_row(vec![Cell::Int(Some(1))]).is_err());
    }

    fn summary(name: &str, v: f64) -> SummaryRow {
        SummaryRow {
            name: n(name),
            values: vec![Cell::Real(Some(v))],
        }
    }

    #[test]
    fn aggregation_sorting_and_naming() {
        let rows = vec![
            summary("part-02_task-fluency_acq-animals_metric-similarity_model-glove_description-window.csv", 0.2),
            summary("part-01_task-fluency_acq-animals_metric-similarity_model-glove_description-window.csv", 0.1),
        ];
        let fields = [Column::new("mean", ColumnKind::Real)];
        let table = aggregate(&rows, &["acq".into()], &fields).unwrap();
        assert_eq!(table.to_csv(2), "part,ses,task,acq,mean\n01,,fluency,animals,0.10\n02,,fluency,animals,0.20\n");
        let name = aggregation_name(&rows, &[]).unwrap();
        assert_eq!(
            name.to_string(),
            "task-fluency_acq-animals_metric-similarity_model-glove_description-window_results-aggregated_table.csv"
        );
        let diags = validate_name(&name, NameProfile::Aggregation, "x");
        assert_eq!(error_count(&diags), 0, "{diags:?}");

        let empty = aggregate(&[], &[], &fields).unwrap();
        assert_eq!(empty.to_csv(6), "part,ses,task,mean\n");

        let mixed = vec![rows[0].clone(), summary("part-03_task-fluency_metric-embeddings.csv", 1.0)];
        assert!(matches!(aggregate(&mixed, &[], &fields), Err(DerivativesError::MixedMetricKinds { .. })));
    }

    proptest! {
        #[test]
        fn aggregation_is_order_free(perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle()) {
            let rows: Vec<SummaryRow> = (0..6)
                .map(|i| summary(&format!("part-0{}_ses-{}_task-t_metric-similarity.csv", i % 3, i / 3), i as f64))
                .collect();
            let shuffled: Vec<SummaryRow> = perm.iter().map(|&i| rows[i].clone()).collect();
            let fields = [Column::new("v", ColumnKind::Real)];
            prop_assert_eq!(
                aggregate(&rows, &[], &fields).unwrap().to_csv(6),
                aggregate(&shuffled, &[], &fields).unwrap().to_csv(6)
            );
        }
    }

    fn meta(t: DateTime<Utc>) -> RunMeta {
        RunMeta {
            tool_version: "0.1.0".into(),
            config_name: "demo".into(),
            config_fingerprint: "ab".repeat(32),
            started: t,
            finished: t,
        }
    }

    fn files() -> Vec<FileStatus> {
        (1..=3)
            .map(|i| FileStatus {
                input: format!("participants/part-0{i}/a/part-0{i}_task-a.txt"),
                status: if i == 2 { EventStatus::Failed } else { EventStatus::Ok },
                outputs: vec![],
                message: if i == 2 { "not valid UTF-8".into() } else { String::new() },
            })
            .collect()
    }

    #[test]
    fn log_content_and_normalisation() {
        let t1 = DateTime::parse_from_rfc3339("2026-01-02T03:04:05.678Z").unwrap().with_timezone(&Utc);
        let t2 = DateTime::parse_from_rfc3339("2026-05-06T07:08:09.000Z").unwrap().with_timezone(&Utc);
        let event = |t| LogEvent {
            timestamp: t,
            status: EventStatus::Failed,
            subject: "participants/part-02/a/part-02_task-a.txt".into(),
            message: "not valid UTF-8".into(),
        };
        let a = render_log(&meta(t1), &[event(t1)], &files());
        let b = render_log(&meta(t2), &[event(t2)], &files());
        assert_ne!(a, b);
        assert_eq!(normalize_timestamps(&a), normalize_timestamps(&b));
        assert!(a.contains("config_fingerprint: abab"));
        assert!(a.contains("2026-01-02T03:04:05.678Z FAILED  participants/part-02"));
        assert!(a.ends_with("summary: 2 processed, 1 failed\n"));
        assert!(!render_summary(&meta(t1), &files()).contains("2026"));

        let dir = tempfile::tempdir().unwrap();
        write_log(dir.path(), &meta(t1), &[], &files()).unwrap();
        assert!(dir.path().join("derivatives/logs/pelican_log.txt").is_file());
        assert!(dir.path().join("derivatives/logs/processing_summary.txt").is_file());
        assert!(validate_derivatives(dir.path()).unwrap().is_empty());
    }
}
