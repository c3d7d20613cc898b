//! Batch execution of a pipeline config over a project tree.
//!
//! One coordinator scans and validates the tree, selects input files and
//! hands them to a pool of `jobs` workers. Workers share only read-only
//! state (config, vector stores) and return their results; outputs are
//! merged in input order, so the derivatives do not depend on the worker
//! count. A single finalizer writes aggregations and logs.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Utc;
use rayon::prelude::*;
use thiserror::Error;

use crate::acoustic::{decode_wav, estimate_pitch, extract_pitch_marks, track_rows, voice_report, AcousticParams, VoiceReport};
use crate::config::{config_fingerprint, load_config, ConfigError, MetricSpec, PipelineConfig};
use crate::dataset::{scan_tree, DatasetError, FileRecord};
use crate::derivatives::{
    aggregate, aggregation_name, derive_name, write_log, write_output, Category, Cell, Column, ColumnKind,
    DerivativePath, DerivativesError, EventStatus, FeatureTable, FileStatus, LogEvent, Provenance, RunMeta,
    SummaryRow, WriteOutcome,
};
use crate::name::{Entity, LpdsName};
use crate::semantic::{embed, load_vectors, mean_pool, similarity_series, tokenize, OovPolicy, Pooling, SemanticError, VectorStore};
use crate::text::{clean_fluency_with, clean_text, remove_timestamps, select_speakers, split_speakers};
use crate::validator::{validate_tree, ValidationReport};
use crate::TOOL_VERSION;

/// Extensions decoded as audio; everything else is read as UTF-8 text.
pub const AUDIO_EXTENSIONS: [&str; 2] = ["wav", "mp3"];

#[derive(Debug, Error)]
pub enum DiscoveryError {
    #[error("no *.yml or *.yaml config file in {0}; pass --config")]
    NotFound(PathBuf),
    #[error("several config files in {root}: {}; pass --config to pick one", .candidates.join(", "))]
    Ambiguous { root: PathBuf, candidates: Vec<String> },
    #[error("cannot list {0}: {1}")]
    Io(PathBuf, std::io::Error),
}

/// The single `*.yml` / `*.yaml` file in the project root.
pub fn discover_config(root: &Path) -> Result<PathBuf, DiscoveryError> {
    let entries = fs::read_dir(root).map_err(|e| DiscoveryError::Io(root.to_path_buf(), e))?;
    let mut found: Vec<String> = entries
        .filter_map(Result::ok)
        .filter(|e| e.path().is_file())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| !n.starts_with('.') && (n.ends_with(".yml") || n.ends_with(".yaml")))
        .collect();
    found.sort();
    match found.len() {
        0 => Err(DiscoveryError::NotFound(root.to_path_buf())),
        1 => Ok(root.join(&found[0])),
        _ => Err(DiscoveryError::Ambiguous {
            root: root.to_path_buf(),
            candidates: found,
        }),
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("project tree has {} validation error(s); run `lpds validate` for details", .0.summary.errors)]
    InvalidTree(Box<ValidationReport>),
    #[error("cannot load vector file {path}: {source}")]
    Vectors { path: PathBuf, source: SemanticError },
    #[error("cannot start worker pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Derivatives(#[from] DerivativesError),
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub root: PathBuf,
    pub config_path: PathBuf,
    /// Worker threads; `None` uses one per logical CPU.
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub config_fingerprint: String,
    pub files: Vec<FileStatus>,
    /// Written or kept outputs, relative to the root, including aggregations.
    pub outputs: Vec<PathBuf>,
    pub validation: ValidationReport,
}

impl RunReport {
    pub fn failed(&self) -> usize {
        self.files.iter().filter(|f| f.status == EventStatus::Failed).count()
    }
}

fn record_matches(cfg: &PipelineConfig, rec: &FileRecord) -> bool {
    let Ok(name) = &rec.name else {
        return false;
    };
    let input = &cfg.input;
    input.extensions.iter().any(|e| e == name.extension())
        && (input.task_dirs.is_empty() || input.task_dirs.contains(&rec.task_dir))
        && input.entity_filters.iter().all(|(k, v)| name.get(k) == Some(v.as_str()))
        && input.suffix.as_deref().is_none_or(|s| name.suffix() == Some(s))
}

type StoreKey = (PathBuf, OovPolicy);

struct Shared {
    root: PathBuf,
    cfg: PipelineConfig,
    stores: HashMap<StoreKey, Arc<VectorStore>>,
}

impl Shared {
    fn store(&self, spec: &MetricSpec) -> Option<&VectorStore> {
        let policy = match spec {
            MetricSpec::Embeddings(p) => p.oov_policy,
            MetricSpec::Similarity(p) => p.oov_policy,
            MetricSpec::Acoustic(_) => return None,
        };
        let v = spec.vectors()?;
        self.stores.get(&(v.resolved.clone(), policy)).map(Arc::as_ref)
    }

    fn decimals(&self) -> usize {
        self.cfg.output.float_decimals
    }
}

struct FileResult {
    status: FileStatus,
    event: LogEvent,
    summaries: Vec<(usize, SummaryRow)>,
}

struct Work<'a> {
    shared: &'a Shared,
    input: &'a LpdsName,
    outputs: Vec<String>,
    warnings: Vec<String>,
    summaries: Vec<(usize, SummaryRow)>,
}

fn output_entities(spec: &MetricSpec, description: &str) -> Vec<Entity> {
    let (metric, model, _) = spec.output_identity();
    let mut out = vec![Entity::new("metric", metric).expect("metric names are tokens")];
    if let Some(m) = model {
        out.push(Entity::new("model", m).expect("model names are validated at load"));
    }
    out.push(Entity::new("description", description).expect("descriptions are tokens"));
    out
}

/// Columns of the aggregation row for a metric.
pub fn summary_columns(spec: &MetricSpec, dimension: usize) -> Vec<Column> {
    let int = |n: &str| Column::new(n, ColumnKind::Integer);
    let real = |n: &str| Column::new(n, ColumnKind::Real);
    match spec {
        MetricSpec::Embeddings(p) => {
            let mut cols = vec![int("tokens"), int("oov_count")];
            if p.pooling == Pooling::Mean {
                cols.extend((1..=dimension).map(|i| real(&format!("v{i}"))));
            }
            cols
        }
        MetricSpec::Similarity(_) => vec![
            int("tokens"),
            int("oov_count"),
            int("count"),
            int("skipped"),
            real("mean"),
            real("sd"),
            real("min"),
            real("max"),
        ],
        MetricSpec::Acoustic(_) => VOICE_COLUMNS
            .iter()
            .map(|n| if *n == "pause_count" { int(n) } else { real(n) })
            .collect(),
    }
}

const VOICE_COLUMNS: [&str; 10] = [
    "mean_f0_hz",
    "sd_f0_hz",
    "jitter_local_pct",
    "shimmer_local_pct",
    "mean_intensity_dbfs",
    "sd_intensity_dbfs",
    "voiced_fraction",
    "pause_count",
    "total_pause_s",
    "duration_s",
];

fn voice_cells(r: &VoiceReport) -> Vec<Cell> {
    vec![
        Cell::Real(r.mean_f0_hz),
        Cell::Real(r.sd_f0_hz),
        Cell::Real(r.jitter_local_pct),
        Cell::Real(r.shimmer_local_pct),
        Cell::Real(Some(r.mean_intensity_dbfs)),
        Cell::Real(Some(r.sd_intensity_dbfs)),
        Cell::Real(Some(r.voiced_fraction)),
        Cell::Int(Some(r.pause_count as i64)),
        Cell::Real(Some(r.total_pause_s)),
        Cell::Real(Some(r.duration_s)),
    ]
}

fn count(n: usize) -> Cell {
    Cell::Int(Some(n as i64))
}

impl Work<'_> {
    fn write(&mut self, category: Category, name: LpdsName, bytes: &[u8]) -> Result<(), String> {
        let path = DerivativePath::new(category, name);
        let outcome = write_output(&self.shared.root, &path, bytes, self.shared.cfg.output.overwrite_policy)
            .map_err(|e| e.to_string())?;
        let rel = path.relative().to_string_lossy().replace('\\', "/");
        self.outputs.push(match outcome {
            WriteOutcome::Written => rel,
            WriteOutcome::Skipped => format!("{rel} (kept)"),
        });
        Ok(())
    }

    fn write_table(&mut self, spec: &MetricSpec, description: &str, table: &FeatureTable) -> Result<(), String> {
        let name = derive_name(self.input, &output_entities(spec, description), None, "csv").map_err(|e| e.to_string())?;
        let csv = table.to_csv(self.shared.decimals());
        self.write(Category::Metric(spec.kind().to_string()), name, csv.as_bytes())
    }

    fn summary_name(&self, spec: &MetricSpec) -> Result<LpdsName, String> {
        let (_, _, description) = spec.output_identity();
        derive_name(self.input, &output_entities(spec, description), None, "csv").map_err(|e| e.to_string())
    }

    fn text(&mut self, path: &Path) -> Result<(), String> {
        let cfg = &self.shared.cfg;
        let bytes = fs::read(path).map_err(|e| format!("cannot read: {e}"))?;
        let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(&bytes);
        let mut text = String::from_utf8(bytes.to_vec()).map_err(|_| "not valid UTF-8".to_string())?;
        let flags = &cfg.cleaning.flags;

        if let Some(speaker) = &cfg.cleaning.speaker {
            // timestamps go first so a leading `[00:01]` cannot hide the tag
            if flags.remove_timestamps {
                text = remove_timestamps(&text);
            }
            text = select_speakers(&split_speakers(&text), &speaker.keep_speakers);
            if text.is_empty() {
                self.warnings.push(format!("no turns by {}", speaker.keep_speakers.join(", ")));
            }
        }
        let (content, tokens) = match &cfg.cleaning.fluency {
            Some(spec) => {
                let list = clean_fluency_with(&text, spec, |item| clean_text(item, flags).content);
                let content = list.words.iter().map(|w| format!("{w}\n")).collect::<String>();
                (content, list.words)
            }
            None => {
                let content = clean_text(&text, flags).content;
                let tokens = tokenize(&content);
                (content, tokens)
            }
        };

        if cfg.cleaning.enabled() {
            let proc = Entity::new("proc", "cleaned").expect("literal");
            let name = derive_name(self.input, &[proc], Some("text"), "txt").map_err(|e| e.to_string())?;
            let mut bytes = content.into_bytes();
            if bytes.last().is_some_and(|b| *b != b'\n') {
                bytes.push(b'\n');
            }
            self.write(Category::Preprocessing, name, &bytes)?;
        }

        for (i, spec) in cfg.metrics.iter().enumerate() {
            let Some(store) = self.shared.store(spec) else {
                continue;
            };
            let values = match spec {
                MetricSpec::Embeddings(p) => self.embeddings(spec, p.pooling, store, &tokens)?,
                MetricSpec::Similarity(p) => self.similarity(spec, p.mode, p.window_size, store, &tokens)?,
                MetricSpec::Acoustic(_) => unreachable!("acoustic metrics have no store"),
            };
            let row = SummaryRow {
                name: self.summary_name(spec)?,
                values,
            };
            self.summaries.push((i, row));
        }
        Ok(())
    }

    fn embeddings(&mut self, spec: &MetricSpec, pooling: Pooling, store: &VectorStore, tokens: &[String]) -> Result<Vec<Cell>, String> {
        let d = store.dimension();
        let emb = embed(tokens, store, Pooling::None).map_err(|e| e.to_string())?;
        let m = emb.matrix;
        let mut columns = vec![Column::new("token", ColumnKind::String), Column::new("oov", ColumnKind::Integer)];
        columns.extend((1..=d).map(|i| Column::new(format!("v{i}"), ColumnKind::Real)));
        let mut table = FeatureTable::new(columns);
        for (k, row) in m.rows.iter().enumerate() {
            let mut cells = vec![Cell::Str(m.tokens[k].clone()), count(m.oov_mask[k] as usize)];
            cells.extend(row.iter().map(|v| Cell::Real(Some(*v))));
            table.push_row(cells).map_err(|e| e.to_string())?;
        }
        let mut values = vec![count(tokens.len()), count(m.oov_count)];
        if pooling == Pooling::Mean {
            match mean_pool(&m.rows, d) {
                Ok(pooled) => {
                    let mut cells = vec![Cell::Str("__mean__".into()), count(0)];
                    cells.extend(pooled.iter().map(|v| Cell::Real(Some(*v))));
                    table.push_row(cells).map_err(|e| e.to_string())?;
                    values.extend(pooled.iter().map(|v| Cell::Real(Some(*v))));
                }
                Err(e) => {
                    self.warnings.push(format!("{}: {e}", spec.kind()));
                    values.extend((0..d).map(|_| Cell::Real(None)));
                }
            }
        }
        table.provenance = Some(self.provenance());
        let (_, _, description) = spec.output_identity();
        self.write_table(spec, description, &table)?;
        Ok(values)
    }

    fn similarity(
        &mut self,
        spec: &MetricSpec,
        mode: crate::semantic::SimilarityMode,
        window_size: usize,
        store: &VectorStore,
        tokens: &[String],
    ) -> Result<Vec<Cell>, String> {
        let emb = embed(tokens, store, Pooling::None).map_err(|e| e.to_string())?;
        let mut table = FeatureTable::new(vec![Column::new("index", ColumnKind::Integer), Column::new("value", ColumnKind::Real)]);
        let summary = match similarity_series(&emb.matrix, mode, window_size) {
            Ok(series) => {
                for (k, v) in series.values.iter().enumerate() {
                    table.push_row(vec![count(k), Cell::Real(Some(*v))]).map_err(|e| e.to_string())?;
                }
                series.summary
            }
            Err(e @ SemanticError::TooFewTokens { .. }) => {
                self.warnings.push(format!("{}: {e}", spec.kind()));
                crate::semantic::SeriesSummary::of(&[], 0)
            }
            Err(e) => return Err(e.to_string()),
        };
        table.provenance = Some(self.provenance());
        let (_, _, description) = spec.output_identity();
        self.write_table(spec, description, &table)?;
        Ok(vec![
            count(tokens.len()),
            count(emb.matrix.oov_count),
            count(summary.count),
            count(summary.skipped),
            Cell::Real(summary.mean),
            Cell::Real(summary.sd),
            Cell::Real(summary.min),
            Cell::Real(summary.max),
        ])
    }

    fn audio(&mut self, path: &Path) -> Result<(), String> {
        let wanted: Vec<(usize, &MetricSpec, &AcousticParams)> = self
            .shared
            .cfg
            .metrics
            .iter()
            .enumerate()
            .filter_map(|(i, m)| match m {
                MetricSpec::Acoustic(p) => Some((i, m, p)),
                _ => None,
            })
            .collect();
        if wanted.is_empty() {
            return Ok(());
        }
        let buf = decode_wav(path).map_err(|e| e.to_string())?;
        for (i, spec, params) in wanted {
            let track = estimate_pitch(&buf, params).map_err(|e| e.to_string())?;
            let marks = extract_pitch_marks(&buf, &track);
            let report = voice_report(&buf, &track, &marks, params);
            if !report.has_voice() {
                self.warnings.push("no voiced frames".into());
            }
            let columns = summary_columns(spec, 0);
            let mut table = FeatureTable::new(columns);
            table.push_row(voice_cells(&report)).map_err(|e| e.to_string())?;
            table.provenance = Some(self.provenance());
            self.write_table(spec, "summary", &table)?;
            if params.emit_tracks {
                let mut t = FeatureTable::new(
                    ["time_s", "f0_hz", "voicing", "intensity_dbfs"]
                        .iter()
                        .map(|n| Column::new(*n, ColumnKind::Real))
                        .collect(),
                );
                for row in track_rows(&track) {
                    t.push_row(row.iter().map(|v| Cell::Real(Some(*v))).collect()).map_err(|e| e.to_string())?;
                }
                self.write_table(spec, "track", &t)?;
            }
            let row = SummaryRow {
                name: self.summary_name(spec)?,
                values: voice_cells(&report),
            };
            self.summaries.push((i, row));
        }
        Ok(())
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            tool_version: TOOL_VERSION.to_string(),
            config_fingerprint: config_fingerprint(&self.shared.cfg),
        }
    }
}

fn process(shared: &Shared, rec: &FileRecord, duplicate_of: Option<&str>) -> FileResult {
    let name = rec.name.as_ref().expect("selected files have valid names");
    let mut work = Work {
        shared,
        input: name,
        outputs: Vec::new(),
        warnings: Vec::new(),
        summaries: Vec::new(),
    };
    let path = shared.root.join(&rec.relative_path);
    let is_audio = AUDIO_EXTENSIONS.contains(&name.extension().to_ascii_lowercase().as_str());
    let result = match duplicate_of {
        Some(first) => Err(format!("same file name as {first}; outputs would collide")),
        None if is_audio => work.audio(&path),
        None => work.text(&path),
    };
    let (status, message) = match result {
        Err(e) => (EventStatus::Failed, e),
        Ok(()) if work.outputs.is_empty() => (
            EventStatus::Skipped,
            format!("no configured step applies to .{} files", name.extension()),
        ),
        Ok(()) if !work.warnings.is_empty() => (EventStatus::Warning, work.warnings.join("; ")),
        Ok(()) => (EventStatus::Ok, format!("{} output(s)", work.outputs.len())),
    };
    // a failed file contributes nothing to aggregations
    let summaries = if status == EventStatus::Failed { Vec::new() } else { work.summaries };
    FileResult {
        event: LogEvent {
            timestamp: Utc::now(),
            status,
            subject: rec.relative_path.clone(),
            message: message.clone(),
        },
        status: FileStatus {
            input: rec.relative_path.clone(),
            status,
            outputs: work.outputs,
            message,
        },
        summaries,
    }
}

fn load_stores(cfg: &PipelineConfig) -> Result<HashMap<StoreKey, Arc<VectorStore>>, RunError> {
    let mut stores = HashMap::new();
    for spec in &cfg.metrics {
        let policy = match spec {
            MetricSpec::Embeddings(p) => p.oov_policy,
            MetricSpec::Similarity(p) => p.oov_policy,
            MetricSpec::Acoustic(_) => continue,
        };
        let path = spec.vectors().expect("text metrics have vectors").resolved.clone();
        if stores.contains_key(&(path.clone(), policy)) {
            continue;
        }
        let store = load_vectors(&path, policy).map_err(|source| RunError::Vectors {
            path: path.clone(),
            source,
        })?;
        stores.insert((path, policy), Arc::new(store));
    }
    Ok(stores)
}

/// Loads the config, validates the tree and processes every selected file.
/// Per-file failures are recorded in the report, not returned as errors.
pub fn run_pipeline(opts: &RunOptions) -> Result<RunReport, RunError> {
    let started = Utc::now();
    let cfg = load_config(&opts.config_path)?;
    let fingerprint = config_fingerprint(&cfg);
    let tree = scan_tree(&opts.root)?;
    let validation = validate_tree(&tree, false);
    if !validation.is_valid() {
        return Err(RunError::InvalidTree(Box::new(validation)));
    }
    let stores = load_stores(&cfg)?;

    let mut selected: Vec<&FileRecord> = tree.files().filter(|r| record_matches(&cfg, r)).collect();
    selected.sort_by(|a, b| a.relative_path.cmp(&b.relative_path));
    let mut first_seen: HashMap<&str, &str> = HashMap::new();
    let duplicates: Vec<Option<&str>> = selected
        .iter()
        .map(|r| match first_seen.get(r.file_name.as_str()) {
            Some(first) => Some(*first),
            None => {
                first_seen.insert(&r.file_name, &r.relative_path);
                None
            }
        })
        .collect();

    let shared = Shared {
        root: opts.root.clone(),
        cfg,
        stores,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(jobs) = opts.jobs {
        builder = builder.num_threads(jobs.max(1));
    }
    let pool = builder.build().map_err(|e| RunError::ThreadPool(e.to_string()))?;
    let results: Vec<FileResult> = pool.install(|| {
        selected
            .par_iter()
            .zip(duplicates.par_iter())
            .map(|(rec, dup)| process(&shared, rec, *dup))
            .collect()
    });

    let mut outputs: Vec<PathBuf> = Vec::new();
    let mut events = Vec::new();
    let mut files = Vec::new();
    let mut by_metric: BTreeMap<usize, Vec<SummaryRow>> = BTreeMap::new();
    for r in results {
        for o in &r.status.outputs {
            outputs.push(PathBuf::from(o.trim_end_matches(" (kept)")));
        }
        events.push(r.event);
        files.push(r.status);
        for (i, row) in r.summaries {
            by_metric.entry(i).or_default().push(row);
        }
    }

    let cfg = &shared.cfg;
    if cfg.output.aggregate {
        for (i, spec) in cfg.metrics.iter().enumerate() {
            let rows = by_metric.remove(&i).unwrap_or_default();
            let dimension = shared.store(spec).map_or(0, VectorStore::dimension);
            let (_, _, description) = spec.output_identity();
            let identity = output_entities(spec, description);
            let mut table = aggregate(&rows, &cfg.output.group_keys, &summary_columns(spec, dimension))?;
            table.provenance = Some(Provenance {
                tool_version: TOOL_VERSION.to_string(),
                config_fingerprint: fingerprint.clone(),
            });
            let path = DerivativePath::new(Category::Aggregations, aggregation_name(&rows, &identity)?);
            let outcome = write_output(
                &shared.root,
                &path,
                table.to_csv(cfg.output.float_decimals).as_bytes(),
                cfg.output.overwrite_policy,
            )?;
            let rel = path.relative();
            events.push(LogEvent {
                timestamp: Utc::now(),
                status: EventStatus::Ok,
                subject: "run".into(),
                message: format!(
                    "{} {} ({} rows)",
                    if outcome == WriteOutcome::Written { "wrote" } else { "kept" },
                    rel.to_string_lossy().replace('\\', "/"),
                    rows.len()
                ),
            });
            outputs.push(rel);
        }
    }

    let meta = RunMeta {
        tool_version: TOOL_VERSION.to_string(),
        config_name: cfg.config_name.clone(),
        config_fingerprint: fingerprint.clone(),
        started,
        finished: Utc::now(),
    };
    write_log(&shared.root, &meta, &events, &files)?;
    Ok(RunReport {
        config_fingerprint: fingerprint,
        files,
        outputs,
        validation,
    })
}
