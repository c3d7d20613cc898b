//! Static word vectors, token embeddings and cosine similarity series.
//!
//! Vector files use the common text format: an optional `N d` header line,
//! then one `token v1 ... vd` line per word. Contextual (transformer)
//! embeddings and logits are not computed here; anything that produces an
//! [`EmbeddingMatrix`] can feed [`similarity_series`].

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SemanticError {
    #[error("vector file {0} not found")]
    FileNotFound(PathBuf),
    #[error("cannot read vector file {path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("line {line}: expected {expected} components, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, component {col}: {text:?} is not a number")]
    NonNumericComponent { line: usize, col: usize, text: String },
    #[error("vector file contains no vectors")]
    EmptyVocab,
    #[error("vectors have different dimensions ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("{0} vector has zero norm")]
    ZeroNormVector(Operand),
    #[error("no tokens retained for pooling")]
    NoTokensRetained,
    #[error("too few tokens: need {needed}, got {got}")]
    TooFewTokens { needed: usize, got: usize },
    #[error("window size must be at least 2, got {0}")]
    InvalidWindow(usize),
    #[error("{0} needs an external model runtime, which this build does not include")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operand {
    First,
    Second,
}

impl std::fmt::Display for Operand {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Operand::First => "first",
            Operand::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OovPolicy {
    #[default]
    Skip,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Pooling {
    None,
    #[default]
    Mean,
}

impl OovPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            OovPolicy::Skip => "skip",
            OovPolicy::Zero => "zero",
        }
    }
}

impl Pooling {
    pub fn as_str(self) -> &'static str {
        match self {
            Pooling::None => "none",
            Pooling::Mean => "mean",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityMode {
    #[default]
    Consecutive,
    Window,
}

impl SimilarityMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityMode::Consecutive => "consecutive",
            SimilarityMode::Window => "window",
        }
    }
}

/// Read-only word vectors, stored row-major in one buffer.
#[derive(Debug, Clone)]
pub struct VectorStore {
    dimension: usize,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    source_path: PathBuf,
    oov_policy: OovPolicy,
    duplicates: usize,
}

impl VectorStore {
    pub fn from_entries(
        entries: impl IntoIterator<Item = (String, Vec<f64>)>,
        oov_policy: OovPolicy,
    ) -> Result<Self, SemanticError> {
        let mut store = VectorStore {
            dimension: 0,
            index: HashMap::new(),
            data: Vec::new(),
            source_path: PathBuf::new(),
            oov_policy,
            duplicates: 0,
        };
        for (token, v) in entries {
            if store.dimension == 0 {
                store.dimension = v.len();
            }
            if v.len() != store.dimension {
                return Err(SemanticError::LengthMismatch(store.dimension, v.len()));
            }
            store.insert(token, &v);
        }
        if store.index.is_empty() || store.dimension == 0 {
            return Err(SemanticError::EmptyVocab);
        }
        Ok(store)
    }

    fn insert(&mut self, token: String, v: &[f64]) {
        if self.index.contains_key(&token) {
            self.duplicates += 1;
            return;
        }
        self.index.insert(token, self.data.len() / self.dimension.max(1));
        self.data.extend_from_slice(v);
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn source_path(&self) -> &Path {
        &self.source_path
    }

    pub fn oov_policy(&self) -> OovPolicy {
        self.oov_policy
    }

    pub fn with_oov_policy(mut self, policy: OovPolicy) -> Self {
        self.oov_policy = policy;
        self
    }

    /// Number of repeated tokens ignored while loading (first occurrence wins).
    pub fn duplicate_count(&self) -> usize {
        self.duplicates
    }

    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.data[i * self.dimension..(i + 1) * self.dimension])
    }
}

pub fn load_vectors(path: &Path, oov_policy: OovPolicy) -> Result<VectorStore, SemanticError> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Err(SemanticError::FileNotFound(path.to_path_buf()))
        }
        Err(e) => {
            return Err(SemanticError::Io {
                path: path.to_path_buf(),
                message: e.to_string(),
            })
        }
    };
    let mut store = parse_vectors(&text, oov_policy)?;
    store.source_path = path.to_path_buf();
    Ok(store)
}

pub fn parse_vectors(text: &str, oov_policy: OovPolicy) -> Result<VectorStore, SemanticError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut store = VectorStore {
        dimension: 0,
        index: HashMap::new(),
        data: Vec::new(),
        source_path: PathBuf::new(),
        oov_policy,
        duplicates: 0,
    };
    let mut first = true;
    let mut row = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let number = i + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();
        if first {
            first = false;
            if rest.len() == 1 {
                if let (Ok(_), Ok(d)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                    if d > 0 {
                        store.dimension = d;
                        continue;
                    }
                }
            }
        }
        if store.dimension == 0 {
            store.dimension = rest.len();
            if rest.is_empty() {
                return Err(SemanticError::DimensionMismatch {
                    line: number,
                    expected: 1,
                    found: 0,
                });
            }
        }
        if rest.len() != store.dimension {
            return Err(SemanticError::DimensionMismatch {
                line: number,
                expected: store.dimension,
                found: rest.len(),
            });
        }
        row.clear();
        for (col, field) in rest.iter().enumerate() {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| SemanticError::NonNumericComponent {
                    line: number,
                    col: col + 1,
                    text: field.to_string(),
                })?;
            row.push(v);
        }
        store.insert(token.to_string(), &row);
    }
    if store.index.is_empty() {
        return Err(SemanticError::EmptyVocab);
    }
    Ok(store)
}

/// Whitespace tokenization of already-cleaned text.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_string).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    pub tokens: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub oov_mask: Vec<bool>,
    /// Tokens missing from the store, whether removed or zero-filled.
    pub oov_count: usize,
    pub dimension: usize,
}

impl EmbeddingMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let dimension = rows.first().map_or(0, Vec::len);
        let n = rows.len();
        Self {
            tokens: (0..n).map(|i| format!("t{i}")).collect(),
            rows,
            oov_mask: vec![false; n],
            oov_count: 0,
            dimension,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub matrix: EmbeddingMatrix,
    pub pooled: Option<Vec<f64>>,
}

pub fn embed(tokens: &[String], store: &VectorStore, pooling: Pooling) -> Result<Embedding, SemanticError> {
    let d = store.dimension();
    let mut m = EmbeddingMatrix {
        tokens: Vec::with_capacity(tokens.len()),
        rows: Vec::with_capacity(tokens.len()),
        oov_mask: Vec::with_capacity(tokens.len()),
        oov_count: 0,
        dimension: d,
    };
    for t in tokens {
        match store.get(t) {
            Some(v) => {
                m.tokens.push(t.clone());
                m.rows.push(v.to_vec());
                m.oov_mask.push(false);
            }
            None => {
                m.oov_count += 1;
                if store.oov_policy() == OovPolicy::Zero {
                    m.tokens.push(t.clone());
                    m.rows.push(vec![0.0; d]);
                    m.oov_mask.push(true);
                }
            }
        }
    }
    let pooled = match pooling {
        Pooling::None => None,
        Pooling::Mean => Some(mean_pool(&m.rows, d)?),
    };
    Ok(Embedding { matrix: m, pooled })
}

/// Anything that maps a token sequence to one vector per retained token.
///
/// [`VectorStore`] is the static, context-free encoder. Contextual models
/// (transformer embeddings, logits) plug in here from outside the crate;
/// [`ExternalModel`] marks their place.
pub trait TokenEncoder {
    fn model_name(&self) -> &str;
    fn encode(&self, tokens: &[String]) -> Result<EmbeddingMatrix, SemanticError>;
}

impl TokenEncoder for VectorStore {
    fn model_name(&self) -> &str {
        self.source_path().file_stem().and_then(|s| s.to_str()).unwrap_or("vectors")
    }

    fn encode(&self, tokens: &[String]) -> Result<EmbeddingMatrix, SemanticError> {
        embed(tokens, self, Pooling::None).map(|e| e.matrix)
    }
}

/// Stand-in for an encoder backed by a language-model runtime.
#[derive(Debug, Clone)]
pub struct ExternalModel {
    pub name: String,
}

impl TokenEncoder for ExternalModel {
    fn model_name(&self) -> &str {
        &self.name
    }

    fn encode(&self, _tokens: &[String]) -> Result<EmbeddingMatrix, SemanticError> {
        Err(SemanticError::Unsupported(self.name.clone()))
    }
}

pub fn mean_pool(rows: &[Vec<f64>], dimension: usize) -> Result<Vec<f64>, SemanticError> {
    if rows.is_empty() {
        return Err(SemanticError::NoTokensRetained);
    }
    let mut acc = vec![0.0; dimension];
    for r in rows {
        for (a, v) in acc.iter_mut().zip(r) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norm(u: &[f64]) -> f64 {
    dot(u, u).sqrt()
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, SemanticError> {
    if u.len() != v.len() {
        return Err(SemanticError::LengthMismatch(u.len(), v.len()));
    }
    let nu = norm(u);
    if nu == 0.0 {
        return Err(SemanticError::ZeroNormVector(Operand::First));
    }
    let nv = norm(v);
    if nv == 0.0 {
        return Err(SemanticError::ZeroNormVector(Operand::Second));
    }
    Ok(dot(u, v) / (nu * nv))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub count: usize,
    pub skipped: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl SeriesSummary {
    /// Summary over `values`; `sd` is the sample standard deviation.
    pub fn of(values: &[f64], skipped: usize) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                count,
                skipped,
                mean: None,
                sd: None,
                min: None,
                max: None,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = (count > 1).then(|| {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        });
        Self {
            count,
            skipped,
            mean: Some(mean),
            sd,
            min: values.iter().copied().reduce(f64::min),
            max: values.iter().copied().reduce(f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilaritySeries {
    pub mode: SimilarityMode,
    pub window_size: Option<usize>,
    pub values: Vec<f64>,
    pub summary: SeriesSummary,
}

/// Cosine similarity series over the rows of `emb`.
///
/// Consecutive mode compares each row with the next. Window mode emits, for
/// every window start, the mean cosine over all unordered pairs inside the
/// window. Pairs with a zero-norm member are skipped; in window mode a
/// window with no usable pair is skipped as a whole. Values are clamped to
/// `[-1, 1]`.
pub fn similarity_series(
    emb: &EmbeddingMatrix,
    mode: SimilarityMode,
    window_size: usize,
) -> Result<SimilaritySeries, SemanticError> {
    let unit: Vec<Option<Vec<f64>>> = emb
        .rows
        .iter()
        .map(|r| {
            let n = norm(r);
            (n > 0.0).then(|| r.iter().map(|v| v / n).collect())
        })
        .collect();
    let usable = unit.iter().filter(|u| u.is_some()).count();
    let pair = |i: usize, j: usize| -> Option<f64> {
        match (&unit[i], &unit[j]) {
            (Some(a), Some(b)) => Some(dot(a, b).clamp(-1.0, 1.0)),
            _ => None,
        }
    };

    let mut values = Vec::new();
    let mut skipped = 0;
    match mode {
        SimilarityMode::Consecutive => {
            if usable < 2 {
                return Err(SemanticError::TooFewTokens { needed: 2, got: usable });
            }
            for i in 0..emb.len() - 1 {
                match pair(i, i + 1) {
                    Some(c) => values.push(c),
                    None => skipped += 1,
                }
            }
        }
        SimilarityMode::Window => {
            if window_size < 2 {
                return Err(SemanticError::InvalidWindow(window_size));
            }
            if emb.len() < window_size {
                return Err(SemanticError::TooFewTokens {
                    needed: window_size,
                    got: emb.len(),
                });
            }
            for start in 0..=emb.len() - window_size {
                let end = start + window_size;
                let mut sum = 0.0;
                let mut n = 0usize;
                for i in start..end {
                    for j in i + 1..end {
                        if let Some(c) = pair(i, j) {
                            sum += c;
                            n += 1;
                        }
                    }
                }
                if n == 0 {
                    skipped += 1;
                } else {
                    values.push((sum / n as f64).clamp(-1.0, 1.0));
                }
            }
        }
    }
    let summary = SeriesSummary::of(&values, skipped);
    Ok(SimilaritySeries {
        mode,
        window_size: (mode == SimilarityMode::Window).then_some(window_size),
        values,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn store(entries: &[(&str, &[f64])], policy: OovPolicy) -> VectorStore {
        VectorStore::from_entries(
            entries.iter().map(|(t, v)| (t.to_string(), v.to_vec())),
            policy,
        )
        .unwrap()
    }

    fn toks(s: &[&str]) -> Vec<String> {
        s.iter().map(|t| t.to_string()).collect()
    }

    #[test]
    fn encoders() {
        let s = store(&[("dog", &[1.0, 0.0])], OovPolicy::Skip);
        let m = s.encode(&toks(&["dog", "emu"])).unwrap();
        assert_eq!((m.len(), m.oov_count), (1, 1));
        let ext = ExternalModel { name: "roberta".into() };
        assert_eq!(ext.encode(&toks(&["dog"])).unwrap_err(), SemanticError::Unsupported("roberta".into()));
    }

    #[test]
    fn header_file() {
        let s = parse_vectors("2 3\na 1 0 0\nb 0 1 0\n", OovPolicy::Skip).unwrap();
        assert_eq!(s.dimension(), 3);
        assert_eq!(s.len(), 2);
        assert_eq!(s.get("b"), Some(&[0.0, 1.0, 0.0][..]));
    }

    #[test]
    fn arity_error_names_line() {
        let err = parse_vectors("2 3\na 1 0 0\nb 0 1 0\nc 1 2\n", OovPolicy::Skip).unwrap_err();
        assert_eq!(
            err,
            SemanticError::DimensionMismatch { line: 4, expected: 3, found: 2 }
        );
    }

    #[test]
    fn headerless_and_bad_numbers() {
        let s = parse_vectors("a 1 2\nb 3 4\n", OovPolicy::Skip).unwrap();
        assert_eq!(s.dimension(), 2);
        assert_eq!(
            parse_vectors("a 1 x\n", OovPolicy::Skip).unwrap_err(),
            SemanticError::NonNumericComponent { line: 1, col: 2, text: "x".into() }
        );
        assert_eq!(parse_vectors("\n\n", OovPolicy::Skip).unwrap_err(), SemanticError::EmptyVocab);
        assert_eq!(parse_vectors("5 2\n", OovPolicy::Skip).unwrap_err(), SemanticError::EmptyVocab);
    }

    #[test]
    fn duplicates_keep_first() {
        let s = parse_vectors("a 1 0\na 0 1\n", OovPolicy::Skip).unwrap();
        assert_eq!(s.get("a"), Some(&[1.0, 0.0][..]));
        assert_eq!(s.duplicate_count(), 1);
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            load_vectors(Path::new("/nonexistent/v.txt"), OovPolicy::Skip),
            Err(SemanticError::FileNotFound(_))
        ));
    }

    #[test]
    fn tokenize_cases() {
        assert_eq!(tokenize("héllo world"), ["héllo", "world"]);
        assert!(tokenize("").is_empty());
    }

    #[test]
    fn mean_pooling() {
        let s = store(&[("a", &[1.0, 3.0]), ("b", &[3.0, 5.0])], OovPolicy::Skip);
        let e = embed(&toks(&["a", "b"]), &s, Pooling::Mean).unwrap();
        assert_eq!(e.pooled, Some(vec![2.0, 4.0]));
    }

    #[test]
    fn zero_policy_row_is_averaged() {
        let s = store(&[("a", &[2.0, 2.0])], OovPolicy::Zero);
        let e = embed(&toks(&["a", "zz"]), &s, Pooling::Mean).unwrap();
        assert_eq!(e.pooled, Some(vec![1.0, 1.0]));
        assert_eq!(e.matrix.oov_mask, [false, true]);
        assert_eq!(e.matrix.oov_count, 1);
    }

    #[test]
    fn skip_policy_can_empty_the_matrix() {
        let s = store(&[("a", &[2.0, 2.0])], OovPolicy::Skip);
        let e = embed(&toks(&["x", "y"]), &s, Pooling::None).unwrap();
        assert!(e.matrix.is_empty());
        assert_eq!(e.matrix.oov_count, 2);
        assert_eq!(
            embed(&toks(&["x"]), &s, Pooling::Mean).unwrap_err(),
            SemanticError::NoTokensRetained
        );
    }

    #[test]
    fn cosine_cases() {
        assert!((cosine(&[0.3, -2.0], &[0.3, -2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert!((cosine(&[1.0, 2.0, 2.0], &[2.0, 1.0, 2.0]).unwrap() - 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(
            cosine(&[1.0, 0.0], &[0.0, 0.0]),
            Err(SemanticError::ZeroNormVector(Operand::Second))
        );
        assert_eq!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(SemanticError::ZeroNormVector(Operand::First))
        );
    }

    #[test]
    fn consecutive_series() {
        let m = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let s = similarity_series(&m, SimilarityMode::Consecutive, 0).unwrap();
        assert_eq!(s.values, [1.0, 0.0]);
        assert_eq!(s.summary.count, 2);
        assert_eq!(s.summary.mean, Some(0.5));
    }

    #[test]
    fn consecutive_skips_zero_rows() {
        let m = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0], vec![0.0, 0.0], vec![0.0, 1.0], vec![0.0, 2.0]]);
        let s = similarity_series(&m, SimilarityMode::Consecutive, 0).unwrap();
        assert_eq!(s.values, [1.0]);
        assert_eq!(s.summary.skipped, 2);
    }

    #[test]
    fn single_window_is_mean_of_all_pairs() {
        let rows = vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]];
        let m = EmbeddingMatrix::from_rows(rows.clone());
        let s = similarity_series(&m, SimilarityMode::Window, 3).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(s.values.len(), 1);
        assert!((s.values[0] - (h + 0.0 + h) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn too_few_tokens() {
        let m = EmbeddingMatrix::from_rows(vec![vec![1.0, 0.0]]);
        assert_eq!(
            similarity_series(&m, SimilarityMode::Consecutive, 0).unwrap_err(),
            SemanticError::TooFewTokens { needed: 2, got: 1 }
        );
        assert_eq!(
            similarity_series(&m, SimilarityMode::Window, 4).unwrap_err(),
            SemanticError::TooFewTokens { needed: 4, got: 1 }
        );
    }

    fn matrix(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
        prop::collection::vec(prop::collection::vec(-5.0f64..5.0, d), n)
    }

    proptest! {
        #[test]
        fn values_bounded_and_lengths(rows in matrix(12, 4), w in 2usize..12) {
            prop_assume!(rows.iter().all(|r| norm(r) > 1e-6));
            let m = EmbeddingMatrix::from_rows(rows);
            let c = similarity_series(&m, SimilarityMode::Consecutive, 0).unwrap();
            let win = similarity_series(&m, SimilarityMode::Window, w).unwrap();
            prop_assert_eq!(c.values.len(), 11);
            prop_assert_eq!(win.values.len(), 12 - w + 1);
            for v in c.values.iter().chain(&win.values) {
                prop_assert!((-1.0..=1.0).contains(v));
            }
        }

        #[test]
        fn scale_invariance(rows in matrix(10, 5), k in 0.01f64..100.0) {
            prop_assume!(rows.iter().all(|r| norm(r) > 1e-6));
            let scaled: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|v| v * k).collect()).collect();
            let a = similarity_series(&EmbeddingMatrix::from_rows(rows), SimilarityMode::Window, 4).unwrap();
            let b = similarity_series(&EmbeddingMatrix::from_rows(scaled), SimilarityMode::Window, 4).unwrap();
            for (x, y) in a.values.iter().zip(&b.values) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn pooling_is_permutation_invariant(rows in matrix(8, 3), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = rows.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = mean_pool(&rows, 3).unwrap();
            let b = mean_pool(&shuffled, 3).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn tokenize_concatenates(a in "[a-zé]{1,6}( [a-zé]{1,6}){0,4}", b in "[a-z]{1,6}( [a-z]{1,6}){0,4}") {
            let mut expected = tokenize(&a);
            expected.extend(tokenize(&b));
            prop_assert_eq!(tokenize(&format!("{a} {b}")), expected);
        }
    }
}
