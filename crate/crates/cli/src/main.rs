//! `lpds`: validate, scaffold, inspect and process LPDS project trees.
//!
//! Exit codes: 0 success, 1 validation errors, 2 usage or config error,
//! 3 at least one file failed during `run`, 4 internal error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lpds_core::dataset::{scaffold_tree, scan_tree};
use lpds_core::derivatives::validate_derivatives;
use lpds_core::name::{validate_name, NameProfile};
use lpds_core::pipeline::{discover_config, run_pipeline, RunError, RunOptions};
use lpds_core::validator::{render_report, validate_tree, ReportFormat};
use lpds_core::{parse_name, serialize_name, Diagnostic, Severity};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_FAILED_FILES: u8 = 3;
const EXIT_INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "lpds", version, about = "Language Processing Data Structure toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check folder layout and filenames of a project tree.
    Validate {
        #[arg(default_value = ".")]
        root: PathBuf,
        /// Treat warnings as errors.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value = "text", value_parser = ["text", "json"])]
        report: String,
        /// Also check the names of everything under derivatives/.
        #[arg(long)]
        derivatives: bool,
    },
    /// Create an empty project tree with participant and task folders.
    Init {
        root: PathBuf,
        #[arg(long, short = 'n', default_value_t = 1)]
        participants: usize,
        /// Number of session folders per participant (longitudinal layout).
        #[arg(long)]
        sessions: Option<usize>,
        /// Task folder name; repeat or separate with commas.
        #[arg(long = "task", short = 't', required = true, value_delimiter = ',')]
        tasks: Vec<String>,
    },
    /// Parse one filename and show its entities and diagnostics.
    Inspect { filename: String },
    /// Run the configured pipeline and write derivatives/.
    Run {
        #[arg(long, default_value = ".")]
        root: PathBuf,
        /// Config file; by default the single *.yml in the root.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Worker threads (default: logical CPU count).
        #[arg(long, short = 'j')]
        jobs: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = std::panic::catch_unwind(|| match cli.command {
        Command::Validate {
            root,
            strict,
            report,
            derivatives,
        } => cmd_validate(root, strict, &report, derivatives),
        Command::Init {
            root,
            participants,
            sessions,
            tasks,
        } => cmd_init(root, participants, sessions, &tasks),
        Command::Inspect { filename } => cmd_inspect(&filename),
        Command::Run { root, config, jobs } => cmd_run(root, config, jobs),
    })
    .unwrap_or(EXIT_INTERNAL);
    ExitCode::from(code)
}

fn print_diagnostic(out: &mut impl Write, d: &Diagnostic) {
    let _ = write!(out, "{} {} {}: {}", d.severity, d.code, d.path, d.message);
    if let Some(h) = &d.fix_hint {
        let _ = write!(out, " [fix: {h}]");
    }
    let _ = writeln!(out);
}

fn cmd_validate(root: PathBuf, strict: bool, report: &str, derivatives: bool) -> u8 {
    let format: ReportFormat = report.parse().expect("clap restricts the value");
    let tree = match scan_tree(&root) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("lpds: {e}");
            return EXIT_USAGE;
        }
    };
    let report = validate_tree(&tree, strict);
    let _ = std::io::stdout().write_all(&render_report(&report, format));
    let mut code = if report.is_valid() { EXIT_OK } else { EXIT_INVALID };
    if derivatives && tree.has_derivatives {
        match validate_derivatives(&root) {
            Ok(diags) => {
                let mut err = std::io::stderr();
                for d in &diags {
                    print_diagnostic(&mut err, d);
                }
                let bad = diags
                    .iter()
                    .any(|d| d.severity == Severity::Error || (strict && d.severity == Severity::Warning));
                if bad {
                    code = EXIT_INVALID;
                }
            }
            Err(e) => {
                eprintln!("lpds: {e}");
                return EXIT_INTERNAL;
            }
        }
    }
    code
}

fn cmd_init(root: PathBuf, participants: usize, sessions: Option<usize>, tasks: &[String]) -> u8 {
    match scaffold_tree(&root, participants, sessions, tasks) {
        Ok(()) => {
            println!("created {}", root.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("lpds: {e}");
            EXIT_USAGE
        }
    }
}

fn cmd_inspect(filename: &str) -> u8 {
    let name = match parse_name(filename) {
        Ok(n) => n,
        Err(e) => {
            println!("file: {filename}");
            println!("parse error: {e}");
            return EXIT_INVALID;
        }
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "file: {filename}");
    let _ = writeln!(out, "{:<4} {:<12} value", "#", "key");
    for (i, e) in name.entities().iter().enumerate() {
        let _ = writeln!(out, "{:<4} {:<12} {}", i + 1, e.key(), e.value());
    }
    let _ = writeln!(out, "suffix: {}", name.suffix().unwrap_or("(none)"));
    let _ = writeln!(out, "extension: {}", name.extension());
    if !name.is_canonical() {
        let _ = writeln!(out, "canonical: {}", serialize_name(&name, true));
    }
    let diags = validate_name(&name, NameProfile::RawData, filename);
    for d in &diags {
        print_diagnostic(&mut out, d);
    }
    if diags.iter().any(|d| d.severity == Severity::Error) {
        EXIT_INVALID
    } else {
        EXIT_OK
    }
}

fn cmd_run(root: PathBuf, config: Option<PathBuf>, jobs: Option<usize>) -> u8 {
    if jobs == Some(0) {
        eprintln!("lpds: --jobs must be at least 1");
        return EXIT_USAGE;
    }
    let config_path = match config {
        Some(p) => p,
        None => match discover_config(&root) {
            Ok(p) => p,
            Err(e) => {
                eprintln!("lpds: {e}");
                return EXIT_USAGE;
            }
        },
    };
    let opts = RunOptions {
        root,
        config_path,
        jobs,
    };
    let report = match run_pipeline(&opts) {
        Ok(r) => r,
        Err(RunError::InvalidTree(report)) => {
            let _ = std::io::stderr().write_all(&render_report(&report, ReportFormat::Text));
            eprintln!("lpds: project tree is invalid; nothing was processed");
            return EXIT_INVALID;
        }
        Err(e @ (RunError::Config(_) | RunError::Vectors { .. } | RunError::Dataset(_))) => {
            eprintln!("lpds: {e}");
            return EXIT_USAGE;
        }
        Err(e) => {
            eprintln!("lpds: {e}");
            return EXIT_INTERNAL;
        }
    };
    let mut out = std::io::stdout().lock();
    for f in &report.files {
        let _ = writeln!(out, "{:<7} {}: {}", f.status.as_str(), f.input, f.message);
    }
    let failed = report.failed();
    let _ = writeln!(
        out,
        "{} file(s), {failed} failed, {} output(s); config fingerprint {}",
        report.files.len(),
        report.outputs.len(),
        report.config_fingerprint
    );
    if failed > 0 {
        EXIT_FAILED_FILES
    } else {
        EXIT_OK
    }
}
