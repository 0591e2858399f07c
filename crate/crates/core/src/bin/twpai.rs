use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use twpai::cli::{self, CliError, Diagnostic, Format, Invocation, Task};

/// Coupled-mode simulation of SNAIL traveling-wave parametric amplifier
/// isolators.
#[derive(Debug, Parser)]
#[command(name = "twpai", version, about)]
struct Args {
    /// cell-params | dispersion | phase-mismatch | gain | isolation |
    /// saturation | noise-fit | flux-sweep
    task: String,
    /// Run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output file (default: the config's [output] path, else stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json (default: the config's [output] format).
    #[arg(long)]
    format: Option<String>,
    /// Worker threads for parallel sweeps (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn config_error(message: String) -> CliError {
    CliError::Config(vec![Diagnostic { line: None, message }])
}

fn invocation(args: &Args) -> Result<Invocation, CliError> {
    let task = Task::parse(&args.task).ok_or_else(|| config_error(format!("unknown task '{}'", args.task)))?;
    let format = match &args.format {
        Some(f) => Some(Format::parse(f).ok_or_else(|| config_error(format!("unknown format '{f}'")))?),
        None => None,
    };
    Ok(Invocation {
        task: Some(task),
        config: args.config.clone(),
        out: args.out.clone(),
        format,
    })
}

fn main_inner(args: &Args) -> Result<(), CliError> {
    let inv = invocation(args)?;
    let job = || cli::execute(&inv);
    let result = match args.threads {
        Some(0) => return Err(config_error("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| config_error(format!("cannot start {n} threads: {e}")))?
            .install(job),
        None => job(),
    }?;
    if let Some(text) = result {
        let mut stdout = std::io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| CliError::Io {
                context: "cannot write to stdout".into(),
                source: e,
            })?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("TWPAI_LOG", "warn")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = config_error(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match main_inner(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
