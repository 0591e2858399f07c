//! Configuration-driven front end: `twpai <task> --config <path>`.
//!
//! The binary is a thin wrapper around [`execute`], which validates the
//! configuration, runs the task and writes the result. Failures map to exit
//! code 2 (configuration) or 3 (numerical) and to a single JSON object
//! describing the problem.

pub mod config;
pub mod output;
pub mod run;

use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use config::{validate, validate_with, Diagnostic, Format, RunConfig, Task};
pub use output::Table;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration ({} problem(s))", .0.len())]
    Config(Vec<Diagnostic>),
    #[error("{0}")]
    Numeric(#[from] crate::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }

    /// The machine-readable error object printed on stderr.
    pub fn to_json(&self) -> Value {
        let (kind, diagnostics) = match self {
            CliError::Config(d) => ("ConfigError", d.clone()),
            CliError::Io { .. } => ("IoError", Vec::new()),
            CliError::Numeric(e) => (e.kind(), Vec::new()),
        };
        let message = match self {
            CliError::Config(d) => d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "),
            other => other.to_string(),
        };
        json!({
            "error": {
                "kind": kind,
                "exit_code": self.exit_code(),
                "message": message,
                "diagnostics": diagnostics,
            }
        })
    }
}

/// Command-line overrides of the configuration.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub task: Option<Task>,
    pub config: PathBuf,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Read and validate the configuration file, applying command-line
/// overrides. Relative paths inside the file resolve against its directory.
pub fn load(inv: &Invocation) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(&inv.config).map_err(|e| {
        CliError::Config(vec![Diagnostic {
            line: None,
            message: format!("cannot read config {}: {e}", inv.config.display()),
        }])
    })?;
    let base = inv.config.parent().unwrap_or(Path::new("."));
    let mut config = validate_with(&text, inv.task, base).map_err(CliError::Config)?;
    if let Some(out) = &inv.out {
        config.output.path = Some(out.clone());
    }
    if let Some(format) = inv.format {
        config.output.format = format;
    }
    Ok(config)
}

/// Run a validated configuration and return the rendered output.
pub fn render_run(config: &RunConfig) -> Result<String, CliError> {
    let table = run::run(config)?;
    Ok(output::render(&table, config, config.output.format))
}

/// Load, run and write. Output goes to the configured path or, if none,
/// is returned for the caller to print.
pub fn execute(inv: &Invocation) -> Result<Option<String>, CliError> {
    let config = load(inv)?;
    let text = render_run(&config)?;
    match &config.output.path {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Io {
                context: format!("cannot write {}", path.display()),
                source: e,
            })?;
            log::info!("wrote {}", path.display());
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
