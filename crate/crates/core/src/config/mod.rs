//! Pipeline configuration: schema, loading and fingerprinting.
//!
//! The file format is the YAML subset described in [`yaml`]. Every key is
//! checked against the schema below; unknown keys are errors.
//!
//! ```yaml
//! config_name: fluency-animals      # optional, default "pipeline"
//! input:
//!   task_dirs: [fluency]            # optional folder-name filter
//!   entity_filters:                 # optional key: value filters
//!     acq: animals
//!   suffix: transcript              # optional
//!   extensions: [txt]               # required, non-empty
//! cleaning:
//!   remove_timestamps: true
//!   lowercase: true
//!   fluency:
//!     drop_duplicates: true
//! metrics:
//!   - kind: similarity
//!     params:
//!       vector_file: vectors/glove-mini.txt
//!       mode: window
//!       window_size: 8
//! output:
//!   overwrite_policy: overwrite
//! ```

pub mod yaml;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::acoustic::AcousticParams;
use crate::name::{is_valid_key, is_valid_token};
use crate::semantic::{OovPolicy, Pooling, SimilarityMode};
use crate::text::{CleaningFlags, FluencySpec};
use yaml::{Node, Value, YamlError};

pub const DEFAULT_CONFIG_NAME: &str = "pipeline";
pub const DEFAULT_WINDOW_SIZE: usize = 8;
pub const DEFAULT_FLOAT_DECIMALS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config file not found: {0}")]
    FileNotFound(PathBuf),
    #[error("cannot read config {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("syntax error at line {line}, column {col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("tab character used for indentation at line {line}")]
    TabIndentation { line: usize },
    #[error("unknown key `{path}` at line {line}")]
    UnknownKey { path: String, line: usize },
    #[error("invalid value for `{path}`: {reason}")]
    InvalidValue { path: String, reason: String },
    #[error("missing required key `{0}`")]
    MissingRequired(String),
}

impl From<YamlError> for ConfigError {
    fn from(e: YamlError) -> Self {
        match e {
            YamlError::Syntax { line, col, message } => ConfigError::Syntax { line, col, message },
            YamlError::TabIndentation { line } => ConfigError::TabIndentation { line },
        }
    }
}

fn invalid(path: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        path: path.to_string(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputSpec {
    pub task_dirs: Vec<String>,
    pub entity_filters: BTreeMap<String, String>,
    pub suffix: Option<String>,
    /// Without the leading dot.
    pub extensions: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeakerSpec {
    pub keep_speakers: Vec<String>,
}

/// Speaker tags are always `Name:` line prefixes.
pub const TAG_STYLE_LINE_PREFIX: &str = "line-prefix";

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct CleaningSpec {
    pub flags: CleaningFlags,
    pub speaker: Option<SpeakerSpec>,
    pub fluency: Option<FluencySpec>,
}

impl CleaningSpec {
    pub fn enabled(&self) -> bool {
        self.flags.any() || self.speaker.is_some() || self.fluency.is_some()
    }
}

/// Word-vector file reference. `path` is kept as written; `resolved` is
/// relative to the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorSource {
    pub path: String,
    #[serde(skip)]
    pub resolved: PathBuf,
    pub model: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmbeddingParams {
    pub vectors: VectorSource,
    pub pooling: Pooling,
    pub oov_policy: OovPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimilarityParams {
    pub vectors: VectorSource,
    pub mode: SimilarityMode,
    pub window_size: usize,
    pub oov_policy: OovPolicy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum MetricSpec {
    Embeddings(EmbeddingParams),
    Similarity(SimilarityParams),
    Acoustic(AcousticParams),
}

impl MetricSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            MetricSpec::Embeddings(_) => "embeddings",
            MetricSpec::Similarity(_) => "similarity",
            MetricSpec::Acoustic(_) => "acoustic",
        }
    }

    pub fn vectors(&self) -> Option<&VectorSource> {
        match self {
            MetricSpec::Embeddings(p) => Some(&p.vectors),
            MetricSpec::Similarity(p) => Some(&p.vectors),
            MetricSpec::Acoustic(_) => None,
        }
    }

    pub fn is_text_metric(&self) -> bool {
        !matches!(self, MetricSpec::Acoustic(_))
    }

    /// The `(metric, model, description)` triple naming this metric's outputs.
    pub fn output_identity(&self) -> (&'static str, Option<&str>, &'static str) {
        match self {
            MetricSpec::Embeddings(p) => (
                "embeddings",
                Some(&p.vectors.model),
                match p.pooling {
                    Pooling::Mean => "mean",
                    Pooling::None => "tokens",
                },
            ),
            MetricSpec::Similarity(p) => ("similarity", Some(&p.vectors.model), p.mode.as_str()),
            MetricSpec::Acoustic(_) => ("acoustic", None, "summary"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OverwritePolicy {
    #[default]
    Overwrite,
    Skip,
    Error,
}

impl OverwritePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            OverwritePolicy::Overwrite => "overwrite",
            OverwritePolicy::Skip => "skip",
            OverwritePolicy::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputSpec {
    pub overwrite_policy: OverwritePolicy,
    pub aggregate: bool,
    pub float_decimals: usize,
    /// Extra entity keys copied into aggregation rows as columns.
    pub group_keys: Vec<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            overwrite_policy: OverwritePolicy::Overwrite,
            aggregate: true,
            float_decimals: DEFAULT_FLOAT_DECIMALS,
            group_keys: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub config_name: String,
    pub input: InputSpec,
    pub cleaning: CleaningSpec,
    pub metrics: Vec<MetricSpec>,
    pub output: OutputSpec,
}

/// Key-by-key reader over a mapping node that remembers which keys were
/// consumed, so leftovers can be reported as unknown.
struct MapReader<'a> {
    path: String,
    entries: &'a [(String, Node)],
    used: Vec<bool>,
}

const EMPTY: &[(String, Node)] = &[];

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

impl<'a> MapReader<'a> {
    fn new(node: &'a Node, path: &str) -> Result<Self, ConfigError> {
        let entries = match &node.value {
            Value::Map(entries) => entries.as_slice(),
            Value::Null => EMPTY,
            _ => return Err(invalid(path, format!("expected a mapping, found a {}", node.kind_name()))),
        };
        Ok(Self {
            path: path.to_string(),
            used: vec![false; entries.len()],
            entries,
        })
    }

    fn child(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn take(&mut self, key: &str) -> Option<&'a Node> {
        let i = self.entries.iter().position(|(k, _)| k == key)?;
        self.used[i] = true;
        Some(&self.entries[i].1)
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.used.iter().position(|u| !u) {
            Some(i) => Err(ConfigError::UnknownKey {
                path: join(&self.path, &self.entries[i].0),
                line: self.entries[i].1.line,
            }),
            None => Ok(()),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<String>, ConfigError> {
        let path = self.child(key);
        self.take(key).map(|n| as_string(n, &path)).transpose()
    }

    fn bool(&mut self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let path = self.child(key);
        let Some(node) = self.take(key) else {
            return Ok(default);
        };
        match plain(node).as_deref() {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            _ => Err(invalid(&path, "expected true or false")),
        }
    }

    fn float(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        let path = self.child(key);
        let Some(node) = self.take(key) else {
            return Ok(default);
        };
        plain(node)
            .and_then(|t| t.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| invalid(&path, "expected a number"))
    }

    fn uint(&mut self, key: &str, default: usize) -> Result<usize, ConfigError> {
        let path = self.child(key);
        let Some(node) = self.take(key) else {
            return Ok(default);
        };
        plain(node)
            .and_then(|t| t.parse::<usize>().ok())
            .ok_or_else(|| invalid(&path, "expected a non-negative integer"))
    }

    fn strings(&mut self, key: &str) -> Result<Option<Vec<String>>, ConfigError> {
        let path = self.child(key);
        let Some(node) = self.take(key) else {
            return Ok(None);
        };
        let items = match &node.value {
            Value::Seq(items) => items.as_slice(),
            Value::Null => &[],
            _ => return Err(invalid(&path, format!("expected a sequence, found a {}", node.kind_name()))),
        };
        items
            .iter()
            .enumerate()
            .map(|(i, n)| as_string(n, &format!("{path}[{i}]")))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn map(&mut self, key: &str) -> Result<Option<MapReader<'a>>, ConfigError> {
        let path = self.child(key);
        self.take(key).map(|n| MapReader::new(n, &path)).transpose()
    }

    fn choice<T: Copy>(&mut self, key: &str, default: T, options: &[(&str, T)]) -> Result<T, ConfigError> {
        let path = self.child(key);
        let Some(node) = self.take(key) else {
            return Ok(default);
        };
        let text = as_string(node, &path)?;
        options.iter().find(|(name, _)| *name == text).map(|(_, v)| *v).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            invalid(&path, format!("expected one of {}", names.join(", ")))
        })
    }
}

/// Text of an unquoted scalar; quoted scalars are never numbers or flags.
fn plain(node: &Node) -> Option<String> {
    match &node.value {
        Value::Scalar(s) if !s.quoted => Some(s.text.clone()),
        _ => None,
    }
}

fn as_string(node: &Node, path: &str) -> Result<String, ConfigError> {
    match &node.value {
        Value::Scalar(s) => Ok(s.text.clone()),
        _ => Err(invalid(path, format!("expected a string, found a {}", node.kind_name()))),
    }
}

fn parse_input(mut m: MapReader<'_>) -> Result<InputSpec, ConfigError> {
    let task_dirs = m.strings("task_dirs")?.unwrap_or_default();
    let mut entity_filters = BTreeMap::new();
    if let Some(mut filters) = m.map("entity_filters")? {
        for (key, node) in filters.entries {
            let path = filters.child(key);
            if !is_valid_key(key) {
                return Err(invalid(&path, "not a valid entity key"));
            }
            let value = as_string(node, &path)?;
            if !is_valid_token(&value) {
                return Err(invalid(&path, "entity values are alphanumeric"));
            }
            entity_filters.insert(key.clone(), value);
        }
        filters.used.iter_mut().for_each(|u| *u = true);
        filters.finish()?;
    }
    let suffix = m.string("suffix")?;
    if let Some(s) = &suffix {
        if !is_valid_token(s) {
            return Err(invalid(&m.child("suffix"), "suffixes are alphanumeric"));
        }
    }
    let extensions: Vec<String> = m
        .strings("extensions")?
        .unwrap_or_default()
        .into_iter()
        .map(|e| e.trim_start_matches('.').to_string())
        .collect();
    if extensions.is_empty() {
        return Err(ConfigError::MissingRequired(m.child("extensions")));
    }
    if let Some(bad) = extensions.iter().find(|e| !is_valid_token(e)) {
        return Err(invalid(&m.child("extensions"), format!("`{bad}` is not an alphanumeric extension")));
    }
    m.finish()?;
    Ok(InputSpec {
        task_dirs,
        entity_filters,
        suffix,
        extensions,
    })
}

fn parse_cleaning(mut m: MapReader<'_>) -> Result<CleaningSpec, ConfigError> {
    let flags = CleaningFlags {
        remove_timestamps: m.bool("remove_timestamps", false)?,
        remove_special_chars: m.bool("remove_special_chars", false)?,
        remove_punctuation: m.bool("remove_punctuation", false)?,
        lowercase: m.bool("lowercase", false)?,
        normalize_whitespace: m.bool("normalize_whitespace", false)?,
    };
    let speaker = match m.map("speaker")? {
        Some(mut s) => {
            s.choice("tag_style", (), &[(TAG_STYLE_LINE_PREFIX, ())])?;
            let keep_speakers = s.strings("keep_speakers")?.unwrap_or_default();
            if keep_speakers.is_empty() {
                return Err(ConfigError::MissingRequired(s.child("keep_speakers")));
            }
            s.finish()?;
            Some(SpeakerSpec { keep_speakers })
        }
        None => None,
    };
    let fluency = match m.map("fluency")? {
        Some(mut f) => {
            let defaults = FluencySpec::default();
            let separators = match f.strings("separators")? {
                None => defaults.separators,
                Some(list) => {
                    let path = f.child("separators");
                    if list.is_empty() {
                        return Err(invalid(&path, "must not be empty"));
                    }
                    list.iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let mut chars = s.chars();
                            match (chars.next(), chars.next()) {
                                (Some(c), None) => Ok(c),
                                _ => Err(invalid(&format!("{path}[{i}]"), "separators are single characters")),
                            }
                        })
                        .collect::<Result<Vec<_>, _>>()?
                }
            };
            let spec = FluencySpec {
                separators,
                drop_duplicates: f.bool("drop_duplicates", defaults.drop_duplicates)?,
                filler_words: f.strings("filler_words")?.unwrap_or_default(),
            };
            f.finish()?;
            Some(spec)
        }
        None => None,
    };
    if speaker.is_some() && fluency.is_some() {
        return Err(invalid(&m.child("fluency"), "fluency and speaker cleaning cannot be combined"));
    }
    m.finish()?;
    Ok(CleaningSpec {
        flags,
        speaker,
        fluency,
    })
}

/// Alphanumeric characters of the file stem, used as the default model name.
fn default_model(path: &str) -> String {
    Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().chars().filter(char::is_ascii_alphanumeric).collect())
        .unwrap_or_default()
}

fn vector_source(p: &mut MapReader<'_>, base_dir: &Path) -> Result<VectorSource, ConfigError> {
    let key = p.child("vector_file");
    let path = p.string("vector_file")?.ok_or_else(|| ConfigError::MissingRequired(key.clone()))?;
    let resolved = base_dir.join(&path);
    if !resolved.is_file() {
        return Err(invalid(&key, format!("file not found: {}", resolved.display())));
    }
    let model_key = p.child("model");
    let model = p.string("model")?.unwrap_or_else(|| default_model(&path));
    if !is_valid_token(&model) {
        return Err(invalid(&model_key, "model names are alphanumeric; set `model` explicitly"));
    }
    Ok(VectorSource { path, resolved, model })
}

const OOV: &[(&str, OovPolicy)] = &[("skip", OovPolicy::Skip), ("zero", OovPolicy::Zero)];

fn parse_metric(node: &Node, path: &str, base_dir: &Path) -> Result<MetricSpec, ConfigError> {
    let mut m = MapReader::new(node, path)?;
    let kind_path = m.child("kind");
    let kind = m.string("kind")?.ok_or(ConfigError::MissingRequired(kind_path.clone()))?;
    let params_node = m.take("params");
    let null = Node {
        value: Value::Null,
        line: node.line,
        col: node.col,
    };
    let mut p = MapReader::new(params_node.unwrap_or(&null), &m.child("params"))?;
    let spec = match kind.as_str() {
        "embeddings" => MetricSpec::Embeddings(EmbeddingParams {
            vectors: vector_source(&mut p, base_dir)?,
            pooling: p.choice("pooling", Pooling::Mean, &[("mean", Pooling::Mean), ("none", Pooling::None)])?,
            oov_policy: p.choice("oov_policy", OovPolicy::Skip, OOV)?,
        }),
        "similarity" => {
            let vectors = vector_source(&mut p, base_dir)?;
            let mode = p.choice(
                "mode",
                SimilarityMode::Consecutive,
                &[("consecutive", SimilarityMode::Consecutive), ("window", SimilarityMode::Window)],
            )?;
            let window_size = p.uint("window_size", DEFAULT_WINDOW_SIZE)?;
            if window_size < 2 {
                return Err(invalid(&p.child("window_size"), "must be ≥ 2"));
            }
            MetricSpec::Similarity(SimilarityParams {
                vectors,
                mode,
                window_size,
                oov_policy: p.choice("oov_policy", OovPolicy::Skip, OOV)?,
            })
        }
        "acoustic" => {
            let d = AcousticParams::default();
            let params = AcousticParams {
                frame_ms: p.float("frame_ms", d.frame_ms)?,
                hop_ms: p.float("hop_ms", d.hop_ms)?,
                f0_min_hz: p.float("f0_min_hz", d.f0_min_hz)?,
                f0_max_hz: p.float("f0_max_hz", d.f0_max_hz)?,
                voicing_threshold: p.float("voicing_threshold", d.voicing_threshold)?,
                silence_dbfs: p.float("silence_dbfs", d.silence_dbfs)?,
                pause_min_ms: p.float("pause_min_ms", d.pause_min_ms)?,
                emit_tracks: p.bool("emit_tracks", d.emit_tracks)?,
            };
            params.check().map_err(|(field, why)| invalid(&p.child(field), why))?;
            MetricSpec::Acoustic(params)
        }
        _ => return Err(invalid(&kind_path, "expected one of embeddings, similarity, acoustic")),
    };
    p.finish()?;
    m.finish()?;
    Ok(spec)
}

fn parse_output(mut m: MapReader<'_>) -> Result<OutputSpec, ConfigError> {
    let d = OutputSpec::default();
    let overwrite_policy = m.choice(
        "overwrite_policy",
        d.overwrite_policy,
        &[
            ("overwrite", OverwritePolicy::Overwrite),
            ("skip", OverwritePolicy::Skip),
            ("error", OverwritePolicy::Error),
        ],
    )?;
    let aggregate = m.bool("aggregate", d.aggregate)?;
    let float_decimals = m.uint("float_decimals", d.float_decimals)?;
    if !(1..=12).contains(&float_decimals) {
        return Err(invalid(&m.child("float_decimals"), "must be between 1 and 12"));
    }
    let group_keys = m.strings("group_keys")?.unwrap_or_default();
    if let Some(bad) = group_keys.iter().find(|k| !is_valid_key(k)) {
        return Err(invalid(&m.child("group_keys"), format!("`{bad}` is not a valid entity key")));
    }
    m.finish()?;
    Ok(OutputSpec {
        overwrite_policy,
        aggregate,
        float_decimals,
        group_keys,
    })
}

/// Parses config text. Relative vector-file paths resolve against `base_dir`.
pub fn parse_config_str(source: &str, base_dir: &Path) -> Result<PipelineConfig, ConfigError> {
    let source = source.strip_prefix('\u{feff}').unwrap_or(source);
    let root = yaml::parse(source)?;
    let mut m = MapReader::new(&root, "")?;

    let config_name = m.string("config_name")?.unwrap_or_else(|| DEFAULT_CONFIG_NAME.to_string());
    if config_name.trim().is_empty() {
        return Err(invalid("config_name", "must not be empty"));
    }
    if !m.bool("deterministic", true)? {
        return Err(invalid("deterministic", "runs are always deterministic; only `true` is accepted"));
    }
    let input = match m.map("input")? {
        Some(r) => parse_input(r)?,
        None => return Err(ConfigError::MissingRequired("input.extensions".into())),
    };
    let cleaning = match m.map("cleaning")? {
        Some(r) => parse_cleaning(r)?,
        None => CleaningSpec::default(),
    };
    let mut metrics = Vec::new();
    if let Some(node) = m.take("metrics") {
        let items = match &node.value {
            Value::Seq(items) => items.as_slice(),
            Value::Null => &[],
            _ => return Err(invalid("metrics", "expected a sequence of metric entries")),
        };
        for (i, item) in items.iter().enumerate() {
            let path = format!("metrics[{i}]");
            let spec = parse_metric(item, &path, base_dir)?;
            if let Some(j) = metrics.iter().position(|other: &MetricSpec| other.output_identity() == spec.output_identity()) {
                return Err(invalid(&path, format!("writes the same outputs as metrics[{j}]")));
            }
            metrics.push(spec);
        }
    }
    let output = match m.map("output")? {
        Some(r) => parse_output(r)?,
        None => OutputSpec::default(),
    };
    m.finish()?;

    if !cleaning.enabled() && metrics.is_empty() {
        return Err(invalid("cleaning", "the pipeline does nothing: enable a cleaning step or add a metric"));
    }
    Ok(PipelineConfig {
        config_name,
        input,
        cleaning,
        metrics,
        output,
    })
}

pub fn load_config(path: &Path) -> Result<PipelineConfig, ConfigError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Err(ConfigError::FileNotFound(path.to_path_buf())),
        Err(e) => {
            return Err(ConfigError::Io {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        }
    };
    let text = String::from_utf8(bytes).map_err(|_| ConfigError::Io {
        path: path.to_path_buf(),
        message: "not valid UTF-8".into(),
    })?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_config_str(&text, base)
}

fn seq(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| yaml::quote(s)).collect();
    format!("[{}]", quoted.join(", "))
}

fn float(v: f64) -> String {
    format!("{v:?}")
}

/// Canonical text of a config: every field present, keys sorted, strings
/// double-quoted. Parsing it back gives an equal config.
pub fn to_canonical(cfg: &PipelineConfig) -> String {
    let mut out = String::new();
    let f = &cfg.cleaning.flags;
    out.push_str("cleaning:\n");
    if let Some(fl) = &cfg.cleaning.fluency {
        let seps: Vec<String> = fl.separators.iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "  fluency:\n    drop_duplicates: {}", fl.drop_duplicates);
        let _ = writeln!(out, "    filler_words: {}", seq(&fl.filler_words));
        let _ = writeln!(out, "    separators: {}", seq(&seps));
    }
    let _ = writeln!(out, "  lowercase: {}", f.lowercase);
    let _ = writeln!(out, "  normalize_whitespace: {}", f.normalize_whitespace);
    let _ = writeln!(out, "  remove_punctuation: {}", f.remove_punctuation);
    let _ = writeln!(out, "  remove_special_chars: {}", f.remove_special_chars);
    let _ = writeln!(out, "  remove_timestamps: {}", f.remove_timestamps);
    if let Some(sp) = &cfg.cleaning.speaker {
        let _ = writeln!(out, "  speaker:\n    keep_speakers: {}", seq(&sp.keep_speakers));
        let _ = writeln!(out, "    tag_style: {}", yaml::quote(TAG_STYLE_LINE_PREFIX));
    }
    let _ = writeln!(out, "config_name: {}", yaml::quote(&cfg.config_name));
    out.push_str("deterministic: true\n");

    let i = &cfg.input;
    out.push_str("input:\n");
    out.push_str("  entity_filters:\n");
    for (k, v) in &i.entity_filters {
        let _ = writeln!(out, "    {k}: {}", yaml::quote(v));
    }
    let _ = writeln!(out, "  extensions: {}", seq(&i.extensions));
    if let Some(s) = &i.suffix {
        let _ = writeln!(out, "  suffix: {}", yaml::quote(s));
    }
    let _ = writeln!(out, "  task_dirs: {}", seq(&i.task_dirs));

    out.push_str(if cfg.metrics.is_empty() { "metrics: []\n" } else { "metrics:\n" });
    for m in &cfg.metrics {
        let _ = writeln!(out, "  - kind: {}", yaml::quote(m.kind()));
        out.push_str("    params:\n");
        match m {
            MetricSpec::Embeddings(p) => {
                let _ = writeln!(out, "      model: {}", yaml::quote(&p.vectors.model));
                let _ = writeln!(out, "      oov_policy: {}", yaml::quote(p.oov_policy.as_str()));
                let _ = writeln!(out, "      pooling: {}", yaml::quote(p.pooling.as_str()));
                let _ = writeln!(out, "      vector_file: {}", yaml::quote(&p.vectors.path));
            }
            MetricSpec::Similarity(p) => {
                let _ = writeln!(out, "      mode: {}", yaml::quote(p.mode.as_str()));
                let _ = writeln!(out, "      model: {}", yaml::quote(&p.vectors.model));
                let _ = writeln!(out, "      oov_policy: {}", yaml::quote(p.oov_policy.as_str()));
                let _ = writeln!(out, "      vector_file: {}", yaml::quote(&p.vectors.path));
                let _ = writeln!(out, "      window_size: {}", p.window_size);
            }
            MetricSpec::Acoustic(p) => {
                let _ = writeln!(out, "      emit_tracks: {}", p.emit_tracks);
                let _ = writeln!(out, "      f0_max_hz: {}", float(p.f0_max_hz));
                let _ = writeln!(out, "      f0_min_hz: {}", float(p.f0_min_hz));
                let _ = writeln!(out, "      frame_ms: {}", float(p.frame_ms));
                let _ = writeln!(out, "      hop_ms: {}", float(p.hop_ms));
                let _ = writeln!(out, "      pause_min_ms: {}", float(p.pause_min_ms));
                let _ = writeln!(out, "      silence_dbfs: {}", float(p.silence_dbfs));
                let _ = writeln!(out, "      voicing_threshold: {}", float(p.voicing_threshold));
            }
        }
    }

    let o = &cfg.output;
    out.push_str("output:\n");
    let _ = writeln!(out, "  aggregate: {}", o.aggregate);
    let _ = writeln!(out, "  float_decimals: {}", o.float_decimals);
    let _ = writeln!(out, "  group_keys: {}", seq(&o.group_keys));
    let _ = writeln!(out, "  overwrite_policy: {}", yaml::quote(o.overwrite_policy.as_str()));
    out
}

/// SHA-256 of [`to_canonical`], as 64 lowercase hex digits.
pub fn config_fingerprint(cfg: &PipelineConfig) -> String {
    let digest = Sha256::digest(to_canonical(cfg).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
