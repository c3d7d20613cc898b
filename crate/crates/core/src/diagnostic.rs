//! Validation findings and their frozen codes.

use std::fmt;

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
            Severity::Info => "INFO",
        })
    }
}

/// Diagnostic codes. Codes are stable identifiers; messages are not.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Code {
    /// `participants/` directory missing from the project root.
    E001,
    /// Participant folder not named `part-<label>`.
    E002,
    /// Participant or session without any task subdirectory.
    E003,
    /// Filename does not parse.
    E010,
    /// `part` entity differs from the enclosing participant label.
    E011,
    /// `ses` entity differs from the enclosing session label.
    E012,
    /// `ses` entity present in a file outside any session folder.
    E013,
    /// Uppercase or otherwise invalid entity key.
    E014,
    /// Entity key repeated within one filename.
    E015,
    /// Mandatory `part` or `task` entity missing.
    E016,
    /// Filename does not start with the `part` entity.
    E017,
    /// Entity order deviates from the canonical order.
    W020,
    /// Unknown entity key.
    W021,
    /// Suffix outside the list of common suffixes.
    W022,
    /// Participants mix longitudinal and non-longitudinal layouts.
    W023,
    /// Symbolic link skipped.
    W024,
    /// File placed outside a task directory.
    W025,
    /// Subdirectory inside a task directory.
    W026,
    /// Processing entity (`proc`, `metric`, `model`) in a raw data file.
    W027,
    /// Optional sidecar (README, dataset_description.json) missing.
    I030,
    /// Filename without a suffix.
    I031,
}

impl Code {
    pub const ALL: [Code; 21] = [
        Code::E001,
        Code::E002,
        Code::E003,
        Code::E010,
        Code::E011,
        Code::E012,
        Code::E013,
        Code::E014,
        Code::E015,
        Code::E016,
        Code::E017,
        Code::W020,
        Code::W021,
        Code::W022,
        Code::W023,
        Code::W024,
        Code::W025,
        Code::W026,
        Code::W027,
        Code::I030,
        Code::I031,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Code::E001 => "E001",
            Code::E002 => "E002",
            Code::E003 => "E003",
            Code::E010 => "E010",
            Code::E011 => "E011",
            Code::E012 => "E012",
            Code::E013 => "E013",
            Code::E014 => "E014",
            Code::E015 => "E015",
            Code::E016 => "E016",
            Code::E017 => "E017",
            Code::W020 => "W020",
            Code::W021 => "W021",
            Code::W022 => "W022",
            Code::W023 => "W023",
            Code::W024 => "W024",
            Code::W025 => "W025",
            Code::W026 => "W026",
            Code::W027 => "W027",
            Code::I030 => "I030",
            Code::I031 => "I031",
        }
    }

    pub fn parse(s: &str) -> Option<Code> {
        Code::ALL.into_iter().find(|c| c.as_str() == s)
    }

    /// Severity implied by the code's letter.
    pub fn severity(self) -> Severity {
        match self.as_str().as_bytes()[0] {
            b'E' => Severity::Error,
            b'W' => Severity::Warning,
            _ => Severity::Info,
        }
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

/// One validation finding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub code: Code,
    pub severity: Severity,
    pub path: String,
    pub message: String,
    pub fix_hint: Option<String>,
}

impl Diagnostic {
    pub fn new(code: Code, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            code,
            severity: code.severity(),
            path: path.into(),
            message: message.into(),
            fix_hint: None,
        }
    }

    pub fn with_hint(mut self, hint: impl Into<String>) -> Self {
        self.fix_hint = Some(hint.into());
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip_and_imply_severity() {
        for c in Code::ALL {
            assert_eq!(Code::parse(c.as_str()), Some(c));
        }
        assert_eq!(Code::E001.severity(), Severity::Error);
        assert_eq!(Code::W024.severity(), Severity::Warning);
        assert_eq!(Code::I030.severity(), Severity::Info);
    }
}
