//! Language Processing Data Structure (LPDS) toolkit.
//!
//! Filename grammar, project-tree scanning and validation, and a
//! configuration-driven pipeline that cleans transcripts, extracts semantic
//! and acoustic features and writes LPDS-named derivatives.

pub mod acoustic;
pub mod config;
pub mod dataset;
pub mod derivatives;
pub mod diagnostic;
pub mod name;
pub mod pipeline;
pub mod semantic;
pub mod text;
pub mod validator;

pub use diagnostic::{Code, Diagnostic, Severity};
pub use name::{parse_name, serialize_name, Entity, LpdsName, NameError, NameProfile};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
