//! Scanning and scaffolding of LPDS project trees.
//!
//! Layout: `<root>/participants/part-<label>/[ses-<label>/]<task>/<files>`.
//! Directory entries are visited in lexicographic order, hidden entries are
//! ignored and symbolic links are recorded but never followed.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::name::{is_valid_token, parse_name, LpdsName, NameError};

pub const PARTICIPANTS_DIR: &str = "participants";
pub const DERIVATIVES_DIR: &str = "derivatives";
pub const PARTICIPANT_METADATA: &str = "participant_metadata.json";
pub const DATASET_DESCRIPTION: &str = "dataset_description.json";
pub const LPDS_VERSION: &str = "1.0";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("project root {0} does not exist")]
    RootNotFound(PathBuf),
    #[error("{0} is not a directory")]
    NotADirectory(PathBuf),
    #[error("{0} is not empty")]
    RootNotEmpty(PathBuf),
    #[error("invalid count: {0}")]
    InvalidCount(String),
    #[error("invalid task directory name {0:?}")]
    InvalidTaskName(String),
    #[error("I/O failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Sidecars {
    pub dataset_description: bool,
    pub participants_tsv: bool,
    pub readme: bool,
    pub changes: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProjectTree {
    pub root: PathBuf,
    pub has_participants_dir: bool,
    pub participants: Vec<ParticipantDir>,
    pub sidecars: Sidecars,
    pub has_derivatives: bool,
    /// Relative paths of skipped symbolic links.
    pub symlinks: Vec<String>,
    /// Relative paths of files sitting directly in `participants/`.
    pub stray_files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParticipantDir {
    pub folder: String,
    /// Label from a `part-<label>` folder name, `None` when the name is invalid.
    pub label: Option<String>,
    pub sessions: Vec<SessionDir>,
    pub task_dirs: Vec<TaskDir>,
    pub metadata_present: bool,
    pub stray_files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SessionDir {
    pub folder: String,
    pub label: String,
    pub task_dirs: Vec<TaskDir>,
    pub stray_files: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TaskDir {
    pub name: String,
    pub relative_path: String,
    pub files: Vec<FileRecord>,
    /// Relative paths of subdirectories found inside the task directory.
    pub subdirs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileRecord {
    /// Path relative to the project root, `/`-separated.
    pub relative_path: String,
    pub file_name: String,
    pub name: Result<LpdsName, NameError>,
    pub size_bytes: u64,
    pub participant_label: Option<String>,
    pub session_label: Option<String>,
    pub task_dir: String,
}

impl ProjectTree {
    pub fn files(&self) -> impl Iterator<Item = &FileRecord> {
        self.participants.iter().flat_map(|p| {
            p.task_dirs
                .iter()
                .chain(p.sessions.iter().flat_map(|s| s.task_dirs.iter()))
                .flat_map(|t| t.files.iter())
        })
    }

    pub fn session_count(&self) -> usize {
        self.participants.iter().map(|p| p.sessions.len()).sum()
    }
}

impl ParticipantDir {
    pub fn is_longitudinal(&self) -> bool {
        !self.sessions.is_empty()
    }
}

/// Extracts `<label>` from `<prefix>-<label>` when the label is a valid value token.
pub fn folder_label<'a>(folder: &'a str, prefix: &str) -> Option<&'a str> {
    folder
        .strip_prefix(prefix)
        .and_then(|r| r.strip_prefix('-'))
        .filter(|l| is_valid_token(l))
}

enum EntryKind {
    Dir,
    File(u64),
    Symlink,
}

struct Entry {
    name: String,
    kind: EntryKind,
}

fn list_dir(dir: &Path) -> Result<Vec<Entry>, DatasetError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') {
            continue;
        }
        let path = entry.path();
        let meta = fs::symlink_metadata(&path).map_err(io_err(&path))?;
        let kind = if meta.file_type().is_symlink() {
            EntryKind::Symlink
        } else if meta.is_dir() {
            EntryKind::Dir
        } else {
            EntryKind::File(meta.len())
        };
        out.push(Entry { name, kind });
    }
    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

fn join(rel: &str, name: &str) -> String {
    if rel.is_empty() {
        name.to_string()
    } else {
        format!("{rel}/{name}")
    }
}

pub fn scan_tree(root: &Path) -> Result<ProjectTree, DatasetError> {
    let meta = match fs::metadata(root) {
        Ok(m) => m,
        Err(e) if e.kind() == io::ErrorKind::NotFound => {
            return Err(DatasetError::RootNotFound(root.to_path_buf()))
        }
        Err(e) => return Err(io_err(root)(e)),
    };
    if !meta.is_dir() {
        return Err(DatasetError::NotADirectory(root.to_path_buf()));
    }

    let mut tree = ProjectTree {
        root: root.to_path_buf(),
        has_participants_dir: false,
        participants: Vec::new(),
        sidecars: Sidecars::default(),
        has_derivatives: false,
        symlinks: Vec::new(),
        stray_files: Vec::new(),
    };

    let mut participant_dirs = Vec::new();
    for entry in list_dir(root)? {
        match (&entry.kind, entry.name.as_str()) {
            (EntryKind::Symlink, name) => tree.symlinks.push(name.to_string()),
            (EntryKind::Dir, PARTICIPANTS_DIR) => tree.has_participants_dir = true,
            (EntryKind::Dir, DERIVATIVES_DIR) => tree.has_derivatives = true,
            (EntryKind::File(_), DATASET_DESCRIPTION) => tree.sidecars.dataset_description = true,
            (EntryKind::File(_), "participants.tsv") => tree.sidecars.participants_tsv = true,
            (EntryKind::File(_), "README" | "README.md" | "README.txt") => {
                tree.sidecars.readme = true
            }
            (EntryKind::File(_), "CHANGES") => tree.sidecars.changes = true,
            _ => {}
        }
    }

    if tree.has_participants_dir {
        let pdir = root.join(PARTICIPANTS_DIR);
        for entry in list_dir(&pdir)? {
            let rel = join(PARTICIPANTS_DIR, &entry.name);
            match entry.kind {
                EntryKind::Symlink => tree.symlinks.push(rel),
                EntryKind::File(_) => tree.stray_files.push(rel),
                EntryKind::Dir => participant_dirs.push(entry.name),
            }
        }
    }

    let scanned: Vec<Result<(ParticipantDir, Vec<String>), DatasetError>> = participant_dirs
        .par_iter()
        .map(|folder| scan_participant(root, folder))
        .collect();
    for result in scanned {
        let (participant, links) = result?;
        tree.symlinks.extend(links);
        tree.participants.push(participant);
    }
    tree.symlinks.sort();
    Ok(tree)
}

fn scan_participant(root: &Path, folder: &str) -> Result<(ParticipantDir, Vec<String>), DatasetError> {
    let rel = join(PARTICIPANTS_DIR, folder);
    let label = folder_label(folder, "part").map(str::to_string);
    let mut p = ParticipantDir {
        folder: folder.to_string(),
        label: label.clone(),
        sessions: Vec::new(),
        task_dirs: Vec::new(),
        metadata_present: false,
        stray_files: Vec::new(),
    };
    let mut links = Vec::new();
    for entry in list_dir(&root.join(&rel))? {
        let child = join(&rel, &entry.name);
        match entry.kind {
            EntryKind::Symlink => links.push(child),
            EntryKind::File(_) if entry.name == PARTICIPANT_METADATA => p.metadata_present = true,
            EntryKind::File(_) => p.stray_files.push(child),
            EntryKind::Dir => match folder_label(&entry.name, "ses") {
                Some(ses) => {
                    let mut s = SessionDir {
                        folder: entry.name.clone(),
                        label: ses.to_string(),
                        task_dirs: Vec::new(),
                        stray_files: Vec::new(),
                    };
                    for sub in list_dir(&root.join(&child))? {
                        let sub_rel = join(&child, &sub.name);
                        match sub.kind {
                            EntryKind::Symlink => links.push(sub_rel),
                            EntryKind::File(_) => s.stray_files.push(sub_rel),
                            EntryKind::Dir => s.task_dirs.push(scan_task(
                                root,
                                &sub_rel,
                                &sub.name,
                                label.as_deref(),
                                Some(ses),
                                &mut links,
                            )?),
                        }
                    }
                    p.sessions.push(s);
                }
                None => p.task_dirs.push(scan_task(
                    root,
                    &child,
                    &entry.name,
                    label.as_deref(),
                    None,
                    &mut links,
                )?),
            },
        }
    }
    Ok((p, links))
}

fn scan_task(
    root: &Path,
    rel: &str,
    name: &str,
    participant: Option<&str>,
    session: Option<&str>,
    links: &mut Vec<String>,
) -> Result<TaskDir, DatasetError> {
    let mut t = TaskDir {
        name: name.to_string(),
        relative_path: rel.to_string(),
        files: Vec::new(),
        subdirs: Vec::new(),
    };
    for entry in list_dir(&root.join(rel))? {
        let child = join(rel, &entry.name);
        match entry.kind {
            EntryKind::Symlink => links.push(child),
            EntryKind::Dir => t.subdirs.push(child),
            EntryKind::File(size) => t.files.push(FileRecord {
                name: parse_name(&entry.name),
                file_name: entry.name,
                relative_path: child,
                size_bytes: size,
                participant_label: participant.map(str::to_string),
                session_label: session.map(str::to_string),
                task_dir: name.to_string(),
            }),
        }
    }
    Ok(t)
}

/// Zero-padded labels `1..=count`. A single item is not padded; otherwise
/// the width is that of the largest label, at least two digits.
pub fn numbered_labels(count: usize) -> Vec<String> {
    let width = if count <= 1 {
        1
    } else {
        count.to_string().len().max(2)
    };
    (1..=count).map(|i| format!("{i:0width$}")).collect()
}

pub fn is_valid_task_dir_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && !name.contains(['/', '\\'])
        && name != "."
        && name != ".."
        && folder_label(name, "ses").is_none()
}

pub fn scaffold_tree(
    root: &Path,
    n_participants: usize,
    sessions: Option<usize>,
    task_names: &[String],
) -> Result<(), DatasetError> {
    if n_participants == 0 {
        return Err(DatasetError::InvalidCount(
            "at least one participant is required".into(),
        ));
    }
    if sessions == Some(0) {
        return Err(DatasetError::InvalidCount(
            "session count must be at least 1".into(),
        ));
    }
    if task_names.is_empty() {
        return Err(DatasetError::InvalidCount(
            "at least one task directory is required".into(),
        ));
    }
    if let Some(bad) = task_names.iter().find(|t| !is_valid_task_dir_name(t)) {
        return Err(DatasetError::InvalidTaskName(bad.clone()));
    }
    if root.exists() {
        if !root.is_dir() {
            return Err(DatasetError::NotADirectory(root.to_path_buf()));
        }
        if fs::read_dir(root).map_err(io_err(root))?.next().is_some() {
            return Err(DatasetError::RootNotEmpty(root.to_path_buf()));
        }
    }

    let participants = root.join(PARTICIPANTS_DIR);
    let session_labels = sessions.map(numbered_labels);
    for part in numbered_labels(n_participants) {
        let pdir = participants.join(format!("part-{part}"));
        let bases: Vec<PathBuf> = match &session_labels {
            Some(labels) => labels.iter().map(|s| pdir.join(format!("ses-{s}"))).collect(),
            None => vec![pdir.clone()],
        };
        for base in bases {
            for task in task_names {
                let dir = base.join(task);
                fs::create_dir_all(&dir).map_err(io_err(&dir))?;
            }
        }
    }

    let dirname = root
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let description = format!(
        "{{\"name\": {}, \"lpds_version\": \"{LPDS_VERSION}\"}}\n",
        serde_json::Value::String(dirname.clone())
    );
    let desc_path = root.join(DATASET_DESCRIPTION);
    fs::write(&desc_path, description).map_err(io_err(&desc_path))?;
    let readme = root.join("README");
    fs::write(
        &readme,
        format!("# {dirname}\n\nLPDS dataset. Describe the study, tasks and participants here.\n"),
    )
    .map_err(io_err(&readme))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_padding() {
        assert_eq!(numbered_labels(1), ["1"]);
        assert_eq!(numbered_labels(2), ["01", "02"]);
        assert_eq!(numbered_labels(12)[0], "01");
        assert_eq!(numbered_labels(120)[0], "001");
    }

    #[test]
    fn empty_root_scans_to_empty_tree() {
        let dir = tempfile::tempdir().unwrap();
        let t = scan_tree(dir.path()).unwrap();
        assert!(t.participants.is_empty());
        assert!(!t.has_participants_dir);
        assert_eq!(t.sidecars, Sidecars::default());
    }

    #[test]
    fn missing_root_and_file_root() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            scan_tree(&dir.path().join("nope")),
            Err(DatasetError::RootNotFound(_))
        ));
        let f = dir.path().join("f");
        fs::write(&f, "x").unwrap();
        assert!(matches!(scan_tree(&f), Err(DatasetError::NotADirectory(_))));
    }

    #[test]
    fn scaffold_longitudinal() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("study");
        scaffold_tree(&root, 2, Some(2), &["interview".into()]).unwrap();
        for p in ["01", "02"] {
            for s in ["01", "02"] {
                assert!(root
                    .join(format!("participants/part-{p}/ses-{s}/interview"))
                    .is_dir());
            }
        }
        let desc = fs::read_to_string(root.join(DATASET_DESCRIPTION)).unwrap();
        assert_eq!(desc, "{\"name\": \"study\", \"lpds_version\": \"1.0\"}\n");
        let t = scan_tree(&root).unwrap();
        assert_eq!(t.participants.len(), 2);
        assert_eq!(t.session_count(), 4);
        assert!(t.sidecars.readme && t.sidecars.dataset_description);
    }

    #[test]
    fn scaffold_flat() {
        let dir = tempfile::tempdir().unwrap();
        scaffold_tree(dir.path(), 1, None, &["fluency".into()]).unwrap();
        assert!(dir.path().join("participants/part-1/fluency").is_dir());
    }

    #[test]
    fn scaffold_preconditions() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            scaffold_tree(dir.path(), 0, None, &["a".into()]),
            Err(DatasetError::InvalidCount(_))
        ));
        assert!(matches!(
            scaffold_tree(dir.path(), 1, None, &[]),
            Err(DatasetError::InvalidCount(_))
        ));
        assert!(matches!(
            scaffold_tree(dir.path(), 1, Some(0), &["a".into()]),
            Err(DatasetError::InvalidCount(_))
        ));
        assert!(matches!(
            scaffold_tree(dir.path(), 1, None, &["a/b".into()]),
            Err(DatasetError::InvalidTaskName(_))
        ));
        fs::write(dir.path().join("x"), "").unwrap();
        assert!(matches!(
            scaffold_tree(dir.path(), 1, None, &["a".into()]),
            Err(DatasetError::RootNotEmpty(_))
        ));
    }

    #[test]
    fn records_carry_path_labels_and_parse_failures() {
        let dir = tempfile::tempdir().unwrap();
        let task = dir.path().join("participants/part-07/ses-2/fluency");
        fs::create_dir_all(&task).unwrap();
        fs::write(task.join("part-07_ses-2_task-fluency_transcript.txt"), "abc").unwrap();
        fs::write(task.join("broken name.txt"), "").unwrap();
        fs::write(task.join(".DS_Store"), "").unwrap();
        let t = scan_tree(dir.path()).unwrap();
        let files: Vec<_> = t.files().collect();
        assert_eq!(files.len(), 2);
        assert!(files[0].name.is_err());
        let ok = files[1];
        assert_eq!(ok.size_bytes, 3);
        assert_eq!(ok.participant_label.as_deref(), Some("07"));
        assert_eq!(ok.session_label.as_deref(), Some("2"));
        assert_eq!(ok.task_dir, "fluency");
        assert_eq!(
            ok.relative_path,
            "participants/part-07/ses-2/fluency/part-07_ses-2_task-fluency_transcript.txt"
        );
    }

    #[cfg(unix)]
    #[test]
    fn symlinks_are_recorded_not_followed() {
        let dir = tempfile::tempdir().unwrap();
        let task = dir.path().join("participants/part-01/fluency");
        fs::create_dir_all(&task).unwrap();
        std::os::unix::fs::symlink(dir.path(), task.join("loop")).unwrap();
        let t = scan_tree(dir.path()).unwrap();
        assert_eq!(t.symlinks, ["participants/part-01/fluency/loop"]);
        assert_eq!(t.files().count(), 0);
    }
}
