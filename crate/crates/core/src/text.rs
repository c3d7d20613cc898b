//! Text cleaning: timestamps, special characters, punctuation, case,
//! whitespace, speaker selection and fluency lists.

use std::sync::LazyLock;

use regex::Regex;
use serde::Serialize;

/// Characters treated as punctuation by both the special-character filter
/// (kept) and punctuation removal (dropped).
pub const PUNCTUATION: &[char] = &[
    '.', ',', ';', ':', '!', '?', '(', ')', '\'', '"', '—', '–', '-', '…',
];

pub const STEP_TIMESTAMPS: &str = "remove_timestamps";
pub const STEP_SPECIAL_CHARS: &str = "remove_special_chars";
pub const STEP_PUNCTUATION: &str = "remove_punctuation";
pub const STEP_LOWERCASE: &str = "lowercase";
pub const STEP_WHITESPACE: &str = "normalize_whitespace";

/// The only order in which steps run.
pub const STEP_ORDER: [&str; 5] = [
    STEP_TIMESTAMPS,
    STEP_SPECIAL_CHARS,
    STEP_PUNCTUATION,
    STEP_LOWERCASE,
    STEP_WHITESPACE,
];

static BRACKETED: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\[(?:[0-9]{1,2}:[0-9]{2}:[0-9]{2}|[0-9]{2}:[0-9]{2})(?:\.[0-9]{1,3})?\]").unwrap()
});

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct CleaningFlags {
    pub remove_timestamps: bool,
    pub remove_special_chars: bool,
    pub remove_punctuation: bool,
    pub lowercase: bool,
    pub normalize_whitespace: bool,
}

impl CleaningFlags {
    pub fn all() -> Self {
        Self {
            remove_timestamps: true,
            remove_special_chars: true,
            remove_punctuation: true,
            lowercase: true,
            normalize_whitespace: true,
        }
    }

    pub fn any(&self) -> bool {
        self.enabled_steps().next().is_some()
    }

    /// Enabled step names in execution order.
    pub fn enabled_steps(&self) -> impl Iterator<Item = &'static str> {
        let on = [
            self.remove_timestamps,
            self.remove_special_chars,
            self.remove_punctuation,
            self.lowercase,
            self.normalize_whitespace,
        ];
        STEP_ORDER.into_iter().zip(on).filter(|(_, on)| *on).map(|(s, _)| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CleanText {
    pub content: String,
    pub applied_steps: Vec<&'static str>,
}

fn is_digit_or_colon(b: Option<&u8>) -> bool {
    matches!(b, Some(b'0'..=b'9' | b':'))
}

fn digits(b: &[u8], at: usize, max: usize) -> usize {
    b[at.min(b.len())..].iter().take(max).take_while(|c| c.is_ascii_digit()).count()
}

/// End of a bare `h:mm:ss` / `hh:mm:ss` timestamp (optional `.mmm`) starting
/// at `i`, provided neither neighbour is a digit or colon.
fn bare_timestamp_end(b: &[u8], i: usize) -> Option<usize> {
    if i > 0 && is_digit_or_colon(b.get(i - 1)) {
        return None;
    }
    let h = digits(b, i, 2);
    if h == 0 {
        return None;
    }
    let mut at = i + h;
    for _ in 0..2 {
        if b.get(at) != Some(&b':') || digits(b, at + 1, 2) != 2 {
            return None;
        }
        at += 3;
    }
    let mut ends = vec![at];
    if b.get(at) == Some(&b'.') {
        let f = digits(b, at + 1, 3);
        if f > 0 {
            ends.insert(0, at + 1 + f);
        }
    }
    ends.into_iter().find(|&e| !is_digit_or_colon(b.get(e)))
}

fn remove_bare(text: &str) -> String {
    let b = text.as_bytes();
    let mut out = String::with_capacity(text.len());
    let mut copied = 0;
    let mut i = 0;
    while i < b.len() {
        if b[i].is_ascii_digit() {
            if let Some(end) = bare_timestamp_end(b, i) {
                out.push_str(&text[copied..i]);
                copied = end;
                i = end;
                continue;
            }
        }
        i += 1;
    }
    out.push_str(&text[copied..]);
    out
}

/// Removes bracketed `[h:mm:ss]`, `[hh:mm:ss]` and `[mm:ss]` timestamps,
/// then bare `hh:mm:ss`, each with an optional `.mmm` fraction. Repeats
/// until nothing changes, so removal never leaves a new timestamp behind.
pub fn remove_timestamps(text: &str) -> String {
    let mut current = text.to_string();
    loop {
        let next = remove_bare(&BRACKETED.replace_all(&current, ""));
        if next == current {
            return current;
        }
        current = next;
    }
}

fn is_kept_char(c: char) -> bool {
    c.is_alphanumeric()
        || c.is_whitespace()
        || PUNCTUATION.contains(&c)
        // combining diacritics, as produced by lowercasing e.g. 'İ'
        || ('\u{0300}'..='\u{036F}').contains(&c)
}

/// Replaces every character outside letters, digits, whitespace and
/// [`PUNCTUATION`] with a space.
pub fn remove_special_chars(text: &str) -> String {
    text.chars().map(|c| if is_kept_char(c) { c } else { ' ' }).collect()
}

pub fn remove_punctuation(text: &str) -> String {
    text.chars().filter(|c| !PUNCTUATION.contains(c)).collect()
}

pub fn normalize_whitespace(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn clean_text(text: &str, flags: &CleaningFlags) -> CleanText {
    let mut content = text.to_string();
    let mut applied_steps = Vec::new();
    for step in flags.enabled_steps() {
        content = match step {
            STEP_TIMESTAMPS => remove_timestamps(&content),
            STEP_SPECIAL_CHARS => remove_special_chars(&content),
            STEP_PUNCTUATION => remove_punctuation(&content),
            STEP_LOWERCASE => content.to_lowercase(),
            _ => normalize_whitespace(&content),
        };
        applied_steps.push(step);
    }
    CleanText {
        content,
        applied_steps,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeakerTurn {
    /// Empty for lines before the first tagged line.
    pub speaker: String,
    pub text: String,
    pub line_index: usize,
}

fn speaker_prefix(line: &str) -> Option<(&str, &str)> {
    let (tag, rest) = line.split_once(':')?;
    let tag = tag.trim();
    if tag.is_empty() || tag.contains(char::is_whitespace) {
        return None;
    }
    Some((tag, rest.trim()))
}

/// Splits a transcript on `Name:` line prefixes. Untagged lines continue
/// the previous turn, joined with one space; blank lines are ignored.
pub fn split_speakers(text: &str) -> Vec<SpeakerTurn> {
    let mut turns: Vec<SpeakerTurn> = Vec::new();
    for (line_index, line) in text.lines().enumerate() {
        if let Some((speaker, rest)) = speaker_prefix(line) {
            turns.push(SpeakerTurn {
                speaker: speaker.to_string(),
                text: rest.to_string(),
                line_index,
            });
            continue;
        }
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        match turns.last_mut() {
            Some(turn) if turn.text.is_empty() => turn.text.push_str(line),
            Some(turn) => {
                turn.text.push(' ');
                turn.text.push_str(line);
            }
            None => turns.push(SpeakerTurn {
                speaker: String::new(),
                text: line.to_string(),
                line_index,
            }),
        }
    }
    turns
}

/// Texts of turns by any speaker in `keep` (case-sensitive), one per line.
pub fn select_speakers(turns: &[SpeakerTurn], keep: &[String]) -> String {
    turns
        .iter()
        .filter(|t| keep.contains(&t.speaker))
        .map(|t| t.text.as_str())
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FluencySpec {
    pub separators: Vec<char>,
    pub drop_duplicates: bool,
    pub filler_words: Vec<String>,
}

impl Default for FluencySpec {
    fn default() -> Self {
        Self {
            separators: vec![',', '\n', ';'],
            drop_duplicates: false,
            filler_words: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct FluencyList {
    pub words: Vec<String>,
    pub dropped_duplicates: usize,
    pub dropped_fillers: usize,
}

pub fn clean_fluency(text: &str, spec: &FluencySpec) -> FluencyList {
    clean_fluency_with(text, spec, str::to_string)
}

/// Like [`clean_fluency`], passing each raw item through `normalize` first.
/// Items are then trimmed and lowercased; inner whitespace becomes `_` so
/// multi-word items stay single tokens.
pub fn clean_fluency_with(text: &str, spec: &FluencySpec, normalize: impl Fn(&str) -> String) -> FluencyList {
    let fillers: Vec<String> = spec.filler_words.iter().map(|f| f.trim().to_lowercase()).collect();
    let mut list = FluencyList::default();
    for raw in text.split(|c| spec.separators.contains(&c)) {
        let word = normalize(raw).to_lowercase().split_whitespace().collect::<Vec<_>>().join("_");
        if word.is_empty() {
            continue;
        }
        if fillers.contains(&word) {
            list.dropped_fillers += 1;
        } else if spec.drop_duplicates && list.words.contains(&word) {
            list.dropped_duplicates += 1;
        } else {
            list.words.push(word);
        }
    }
    list
}
