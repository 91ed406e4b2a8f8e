use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use willmore::cli::{dispatch, with_output_dir, RunConfig};
use willmore::{Error, Result};

/// Small-area Willmore spheres from a key/value run configuration.
#[derive(Debug, Parser)]
#[command(name = "willmore", version)]
struct Args {
    /// Run configuration (`key = value` lines).
    config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Worker threads; falls back to WILLMORE_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

fn threads(arg: Option<usize>) -> Result<Option<usize>> {
    let n = match arg {
        Some(n) => Some(n),
        None => match std::env::var("WILLMORE_THREADS") {
            Ok(v) => Some(v.trim().parse().map_err(|_| {
                Error::Configuration(format!("WILLMORE_THREADS: cannot parse '{v}'"))
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(Error::Configuration("thread count must be positive".into()));
    }
    Ok(n)
}

fn run(args: &Args) -> Result<()> {
    if let Some(n) = threads(args.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Configuration(e.to_string()))?;
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| Error::Configuration(format!("{}: {e}", args.config.display())))?;
    let config = with_output_dir(&RunConfig::parse(&text)?, args.output_dir.as_deref());
    let manifest = dispatch(&config)?;
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{}: wrote {} to {}",
        manifest.command,
        manifest.outputs.join(", "),
        manifest.output_dir
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
