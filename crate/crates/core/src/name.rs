//! LPDS filename grammar.
//!
//! A filename is a sequence of `key-value` entities joined by `_`, an
//! optional trailing suffix token without a hyphen, and a mandatory
//! extension after the final dot:
//!
//! ```text
//! part-<label>[_ses-<label>]_task-<label>[_<key>-<value>][_<suffix>].<extension>
//! ```
//!
//! Keys match `[a-z][a-z0-9]*`; values, suffixes and extensions match
//! `[A-Za-z0-9]+`. The first hyphen of a token separates key and value, so a
//! second hyphen is rejected rather than guessed at.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::diagnostic::{Code, Diagnostic};

/// Known entity keys in their canonical filename order.
pub const KNOWN_KEYS: [&str; 12] = [
    "part",
    "ses",
    "task",
    "cat",
    "acq",
    "run",
    "proc",
    "metric",
    "model",
    "group",
    "param",
    "description",
];

/// Suffixes listed as common content classes.
pub const KNOWN_SUFFIXES: [&str; 9] = [
    "transcript",
    "text",
    "recording",
    "audio",
    "table",
    "embeddings",
    "logits",
    "features",
    "annotations",
];

/// Keys that describe processing applied to the data rather than the
/// acquisition itself.
pub const PROCESSING_KEYS: [&str; 5] = ["proc", "metric", "model", "param", "description"];

/// Rank of a known key in the canonical order, `None` for unknown keys.
pub fn key_rank(key: &str) -> Option<usize> {
    KNOWN_KEYS.iter().position(|k| *k == key)
}

pub fn is_valid_key(key: &str) -> bool {
    let mut chars = key.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

pub fn is_valid_token(value: &str) -> bool {
    !value.is_empty() && value.chars().all(|c| c.is_ascii_alphanumeric())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Entity {
    key: String,
    value: String,
}

impl Entity {
    pub fn new(key: impl Into<String>, value: impl Into<String>) -> Result<Self, NameError> {
        let key = key.into();
        let value = value.into();
        check_key(&key)?;
        check_value(&key, &value)?;
        Ok(Self { key, value })
    }

    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn value(&self) -> &str {
        &self.value
    }
}

impl fmt::Display for Entity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.key, self.value)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
pub enum NameError {
    #[error("filename is empty")]
    Empty,
    #[error("filename contains a path separator")]
    PathSeparator,
    #[error("filename has no extension")]
    NoExtension,
    #[error("invalid extension {0:?}")]
    InvalidExtension(String),
    #[error("filename stem is empty")]
    EmptyStem,
    #[error("filename contains no key-value entities")]
    NoEntities,
    #[error("empty token between underscores")]
    EmptyToken,
    #[error("entity {0:?} has an empty key")]
    EmptyEntityKey(String),
    #[error("entity key {0:?} has an empty value")]
    EmptyEntityValue(String),
    #[error("entity {0:?} contains a second hyphen inside its value")]
    HyphenInValue(String),
    #[error("entity key {0:?} contains uppercase characters")]
    UppercaseKey(String),
    #[error("entity key {0:?} is not of the form [a-z][a-z0-9]*")]
    InvalidKey(String),
    #[error("value {value:?} of entity {key:?} is not alphanumeric")]
    InvalidValue { key: String, value: String },
    #[error("entity key {0:?} appears more than once")]
    DuplicateKey(String),
    #[error("token {0:?} without a hyphen appears before other entities")]
    HyphenFreeTokenNotLast(String),
    #[error("suffix {0:?} is not alphanumeric")]
    InvalidSuffix(String),
}

impl NameError {
    /// Whether the error concerns the shape of an entity key.
    pub fn is_key_error(&self) -> bool {
        matches!(
            self,
            NameError::UppercaseKey(_) | NameError::InvalidKey(_) | NameError::EmptyEntityKey(_)
        )
    }
}

fn check_key(key: &str) -> Result<(), NameError> {
    if key.is_empty() {
        return Err(NameError::EmptyEntityKey(key.to_string()));
    }
    if key.chars().any(|c| c.is_uppercase()) {
        return Err(NameError::UppercaseKey(key.to_string()));
    }
    if !is_valid_key(key) {
        return Err(NameError::InvalidKey(key.to_string()));
    }
    Ok(())
}

fn check_value(key: &str, value: &str) -> Result<(), NameError> {
    if value.is_empty() {
        return Err(NameError::EmptyEntityValue(key.to_string()));
    }
    if value.contains('-') {
        return Err(NameError::HyphenInValue(format!("{key}-{value}")));
    }
    if !is_valid_token(value) {
        return Err(NameError::InvalidValue {
            key: key.to_string(),
            value: value.to_string(),
        });
    }
    Ok(())
}

/// A parsed LPDS filename.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LpdsName {
    entities: Vec<Entity>,
    suffix: Option<String>,
    extension: String,
}

impl LpdsName {
    pub fn new(
        entities: Vec<Entity>,
        suffix: Option<String>,
        extension: impl Into<String>,
    ) -> Result<Self, NameError> {
        let extension = extension.into();
        if entities.is_empty() {
            return Err(NameError::NoEntities);
        }
        for (i, e) in entities.iter().enumerate() {
            if entities[..i].iter().any(|o| o.key == e.key) {
                return Err(NameError::DuplicateKey(e.key.clone()));
            }
        }
        if let Some(s) = &suffix {
            if !is_valid_token(s) {
                return Err(NameError::InvalidSuffix(s.clone()));
            }
        }
        if !is_valid_token(&extension) {
            return Err(NameError::InvalidExtension(extension));
        }
        Ok(Self {
            entities,
            suffix,
            extension,
        })
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn suffix(&self) -> Option<&str> {
        self.suffix.as_deref()
    }

    pub fn extension(&self) -> &str {
        &self.extension
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entities
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    pub fn has(&self, key: &str) -> bool {
        self.get(key).is_some()
    }

    /// Entities reordered by registry rank; unknown keys follow all known
    /// keys and keep their relative order.
    pub fn canonicalize(&self) -> LpdsName {
        let mut entities = self.entities.clone();
        // stable sort keeps unknown keys in input order
        entities.sort_by_key(|e| key_rank(&e.key).unwrap_or(usize::MAX));
        LpdsName {
            entities,
            suffix: self.suffix.clone(),
            extension: self.extension.clone(),
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize().entities == self.entities
    }

    pub fn with_suffix(mut self, suffix: Option<String>) -> Result<Self, NameError> {
        if let Some(s) = &suffix {
            if !is_valid_token(s) {
                return Err(NameError::InvalidSuffix(s.clone()));
            }
        }
        self.suffix = suffix;
        Ok(self)
    }

    pub fn with_extension(mut self, extension: impl Into<String>) -> Result<Self, NameError> {
        let extension = extension.into();
        if !is_valid_token(&extension) {
            return Err(NameError::InvalidExtension(extension));
        }
        self.extension = extension;
        Ok(self)
    }

    pub fn push(&mut self, entity: Entity) -> Result<(), NameError> {
        if self.has(&entity.key) {
            return Err(NameError::DuplicateKey(entity.key));
        }
        self.entities.push(entity);
        Ok(())
    }
}

impl fmt::Display for LpdsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize_name(self, false))
    }
}

impl std::str::FromStr for LpdsName {
    type Err = NameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_name(s)
    }
}

pub fn parse_name(filename: &str) -> Result<LpdsName, NameError> {
    if filename.is_empty() {
        return Err(NameError::Empty);
    }
    if filename.contains('/') || filename.contains('\\') {
        return Err(NameError::PathSeparator);
    }
    let (stem, extension) = filename.rsplit_once('.').ok_or(NameError::NoExtension)?;
    if extension.is_empty() {
        return Err(NameError::NoExtension);
    }
    if !is_valid_token(extension) {
        return Err(NameError::InvalidExtension(extension.to_string()));
    }
    if stem.is_empty() {
        return Err(NameError::EmptyStem);
    }

    let tokens: Vec<&str> = stem.split('_').collect();
    let mut entities: Vec<Entity> = Vec::with_capacity(tokens.len());
    let mut suffix = None;
    for (i, token) in tokens.iter().enumerate() {
        if token.is_empty() {
            return Err(NameError::EmptyToken);
        }
        match token.split_once('-') {
            Some((key, value)) => {
                check_key(key)?;
                check_value(key, value)?;
                if entities.iter().any(|e| e.key == key) {
                    return Err(NameError::DuplicateKey(key.to_string()));
                }
                entities.push(Entity {
                    key: key.to_string(),
                    value: value.to_string(),
                });
            }
            None if i + 1 == tokens.len() => {
                if !is_valid_token(token) {
                    return Err(NameError::InvalidSuffix(token.to_string()));
                }
                suffix = Some(token.to_string());
            }
            None => return Err(NameError::HyphenFreeTokenNotLast(token.to_string())),
        }
    }
    if entities.is_empty() {
        return Err(NameError::NoEntities);
    }
    Ok(LpdsName {
        entities,
        suffix,
        extension: extension.to_string(),
    })
}

pub fn serialize_name(name: &LpdsName, canonical: bool) -> String {
    let owned;
    let name = if canonical {
        owned = name.canonicalize();
        &owned
    } else {
        name
    };
    let mut out = String::new();
    for (i, e) in name.entities.iter().enumerate() {
        if i > 0 {
            out.push('_');
        }
        out.push_str(&e.key);
        out.push('-');
        out.push_str(&e.value);
    }
    if let Some(s) = &name.suffix {
        out.push('_');
        out.push_str(s);
    }
    out.push('.');
    out.push_str(&name.extension);
    out
}

/// Which mandatory-entity rules apply to a filename.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NameProfile {
    RawData,
    Derivative,
    Aggregation,
}

/// Name-level diagnostics. `path` is the location recorded in each finding.
pub fn validate_name(name: &LpdsName, profile: NameProfile, path: &str) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let needs_subject = profile != NameProfile::Aggregation;

    if needs_subject {
        for key in ["part", "task"] {
            if !name.has(key) {
                out.push(
                    Diagnostic::new(
                        Code::E016,
                        path,
                        format!("mandatory entity `{key}` is missing"),
                    )
                    .with_hint(format!("add a `{key}-<label>` entity")),
                );
            }
        }
        if name.has("part") && name.entities[0].key != "part" {
            out.push(
                Diagnostic::new(Code::E017, path, "filename does not start with `part`")
                    .with_hint("put the part entity first"),
            );
        }
    }

    if !name.is_canonical() {
        let expected = serialize_name(name, true);
        let hint = if name.has("part") && name.entities[0].key != "part" {
            format!("part first: rename to {expected}")
        } else {
            format!("rename to {expected}")
        };
        out.push(
            Diagnostic::new(Code::W020, path, "entity order deviates from the canonical order")
                .with_hint(hint),
        );
    }

    for e in &name.entities {
        if key_rank(&e.key).is_none() {
            out.push(Diagnostic::new(
                Code::W021,
                path,
                format!("unknown entity key `{}`", e.key),
            ));
        }
    }

    if profile == NameProfile::RawData {
        for e in &name.entities {
            if ["proc", "metric", "model"].contains(&e.key.as_str()) {
                out.push(
                    Diagnostic::new(
                        Code::W027,
                        path,
                        format!("processing entity `{}` in a raw data file", e.key),
                    )
                    .with_hint("processed outputs belong under derivatives/"),
                );
            }
        }
    }

    match name.suffix() {
        Some(s) if !KNOWN_SUFFIXES.contains(&s) => out.push(Diagnostic::new(
            Code::W022,
            path,
            format!("suffix `{s}` is not one of the common suffixes"),
        )),
        Some(_) => {}
        None => out.push(Diagnostic::new(Code::I031, path, "filename has no suffix")),
    }
    out
}
