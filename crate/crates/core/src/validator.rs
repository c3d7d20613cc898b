//! Structural and naming rules over a scanned [`ProjectTree`].

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dataset::{FileRecord, ParticipantDir, ProjectTree, LPDS_VERSION, PARTICIPANTS_DIR};
use crate::diagnostic::{Code, Diagnostic, Severity};
use crate::name::{validate_name, NameError, NameProfile};

pub const VALIDATOR_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportSummary {
    pub valid: bool,
    pub strict: bool,
    pub errors: usize,
    pub warnings: usize,
    pub infos: usize,
    pub participants: usize,
    pub sessions: usize,
    pub files: usize,
    pub profile_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub diagnostics: Vec<Diagnostic>,
    pub summary: ReportSummary,
}

impl ValidationReport {
    pub fn from_diagnostics(
        mut diagnostics: Vec<Diagnostic>,
        strict: bool,
        participants: usize,
        sessions: usize,
        files: usize,
    ) -> Self {
        if strict {
            for d in &mut diagnostics {
                if d.severity == Severity::Warning {
                    d.severity = Severity::Error;
                }
            }
        }
        diagnostics.sort_by(|a, b| a.path.cmp(&b.path).then(a.code.cmp(&b.code)));
        let count = |s| diagnostics.iter().filter(|d| d.severity == s).count();
        let errors = count(Severity::Error);
        let summary = ReportSummary {
            valid: errors == 0,
            strict,
            errors,
            warnings: count(Severity::Warning),
            infos: count(Severity::Info),
            participants,
            sessions,
            files,
            profile_version: LPDS_VERSION.to_string(),
        };
        Self {
            diagnostics,
            summary,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.summary.valid
    }

    pub fn codes(&self) -> Vec<Code> {
        self.diagnostics.iter().map(|d| d.code).collect()
    }
}

pub fn validate_tree(tree: &ProjectTree, strict: bool) -> ValidationReport {
    let mut out = Vec::new();

    if !tree.has_participants_dir {
        out.push(
            Diagnostic::new(Code::E001, PARTICIPANTS_DIR, "missing `participants/` directory")
                .with_hint("create a `participants` directory in the project root"),
        );
    }
    if !tree.sidecars.readme {
        out.push(Diagnostic::new(Code::I030, "README", "optional README is missing"));
    }
    if !tree.sidecars.dataset_description {
        out.push(Diagnostic::new(
            Code::I030,
            "dataset_description.json",
            "optional dataset_description.json is missing",
        ));
    }
    for link in &tree.symlinks {
        out.push(Diagnostic::new(Code::W024, link, "symbolic link skipped"));
    }
    for f in &tree.stray_files {
        out.push(unexpected_file(f));
    }

    let longitudinal = tree.participants.iter().filter(|p| p.is_longitudinal()).count();
    let flat = tree
        .participants
        .iter()
        .filter(|p| !p.task_dirs.is_empty() && !p.is_longitudinal())
        .count();
    if longitudinal > 0 && flat > 0 {
        out.push(Diagnostic::new(
            Code::W023,
            PARTICIPANTS_DIR,
            format!(
                "{longitudinal} participant(s) use session folders while {flat} do not"
            ),
        ));
    }

    let per_participant: Vec<Vec<Diagnostic>> =
        tree.participants.par_iter().map(check_participant).collect();
    out.extend(per_participant.into_iter().flatten());

    ValidationReport::from_diagnostics(
        out,
        strict,
        tree.participants.len(),
        tree.session_count(),
        tree.files().count(),
    )
}

fn unexpected_file(path: &str) -> Diagnostic {
    Diagnostic::new(Code::W025, path, "file outside a task directory")
        .with_hint("move data files into a task directory")
}

fn check_participant(p: &ParticipantDir) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let rel = format!("{PARTICIPANTS_DIR}/{}", p.folder);
    if p.label.is_none() {
        out.push(
            Diagnostic::new(
                Code::E002,
                &rel,
                format!("participant folder `{}` is not named part-<label>", p.folder),
            )
            .with_hint("rename to part-<label> with an alphanumeric label"),
        );
    }
    if p.sessions.is_empty() && p.task_dirs.is_empty() {
        out.push(Diagnostic::new(
            Code::E003,
            &rel,
            "participant has no task subdirectory",
        ));
    }
    if p.is_longitudinal() && !p.task_dirs.is_empty() {
        out.push(Diagnostic::new(
            Code::W023,
            &rel,
            "participant mixes session folders and task folders",
        ));
    }
    for f in &p.stray_files {
        out.push(unexpected_file(f));
    }
    for s in &p.sessions {
        if s.task_dirs.is_empty() {
            out.push(Diagnostic::new(
                Code::E003,
                format!("{rel}/{}", s.folder),
                "session has no task subdirectory",
            ));
        }
        for f in &s.stray_files {
            out.push(unexpected_file(f));
        }
    }
    for t in p
        .task_dirs
        .iter()
        .chain(p.sessions.iter().flat_map(|s| s.task_dirs.iter()))
    {
        for d in &t.subdirs {
            out.push(Diagnostic::new(
                Code::W026,
                d,
                "subdirectory inside a task directory is not scanned",
            ));
        }
        for f in &t.files {
            check_file(f, &mut out);
        }
    }
    out
}

fn check_file(f: &FileRecord, out: &mut Vec<Diagnostic>) {
    let path = f.relative_path.as_str();
    let name = match &f.name {
        Ok(n) => n,
        Err(e) => {
            let code = match e {
                e if e.is_key_error() => Code::E014,
                NameError::DuplicateKey(_) => Code::E015,
                _ => Code::E010,
            };
            out.push(Diagnostic::new(code, path, format!("cannot parse `{}`: {e}", f.file_name)));
            return;
        }
    };
    out.extend(validate_name(name, NameProfile::RawData, path));

    if let (Some(entity), Some(folder)) = (name.get("part"), f.participant_label.as_deref()) {
        if entity != folder {
            out.push(
                Diagnostic::new(
                    Code::E011,
                    path,
                    format!("part entity `{entity}` does not match participant folder `part-{folder}`"),
                )
                .with_hint(format!("use part-{folder}")),
            );
        }
    }
    match (name.get("ses"), f.session_label.as_deref()) {
        (Some(entity), Some(folder)) if entity != folder => out.push(
            Diagnostic::new(
                Code::E012,
                path,
                format!("ses entity `{entity}` does not match session folder `ses-{folder}`"),
            )
            .with_hint(format!("use ses-{folder}")),
        ),
        (Some(entity), None) => out.push(Diagnostic::new(
            Code::E013,
            path,
            format!("ses entity `{entity}` but the file is not inside a session folder"),
        )),
        _ => {}
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown report format {0:?} (expected text or json)")]
pub struct UnknownFormat(pub String);

impl FromStr for ReportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    lpds_validator_version: &'a str,
    summary: &'a ReportSummary,
    diagnostics: &'a [Diagnostic],
}

pub fn render_report(report: &ValidationReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Text => render_text(report).into_bytes(),
        ReportFormat::Json => {
            let doc = JsonReport {
                lpds_validator_version: VALIDATOR_VERSION,
                summary: &report.summary,
                diagnostics: &report.diagnostics,
            };
            let mut s = serde_json::to_string_pretty(&doc).expect("report serializes");
            s.push('\n');
            s.into_bytes()
        }
    }
}

fn render_text(report: &ValidationReport) -> String {
    let mut s = String::new();
    for d in &report.diagnostics {
        s.push_str(&format!("{} {} {}: {}", d.severity, d.code, d.path, d.message));
        if let Some(h) = &d.fix_hint {
            s.push_str(&format!(" [fix: {h}]"));
        }
        s.push('\n');
    }
    let sum = &report.summary;
    s.push_str(&format!(
        "{}: {} errors, {} warnings\n",
        if sum.valid { "OK" } else { "FAILED" },
        sum.errors,
        sum.warnings
    ));
    s.push_str(&format!(
        "summary: {} participants, {} sessions, {} files, {} info\n",
        sum.participants, sum.sessions, sum.files, sum.infos
    ));
    s
}
