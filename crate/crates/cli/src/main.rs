use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use kere_cli::{run, Command, ConfigError, Format, JobConfig};

/// Numerical analysis of surface homeomorphisms.
#[derive(Parser, Debug)]
#[command(name = "kere", version)]
struct Args {
    /// Map document: inline JSON, a file path, or a builtin name.
    #[arg(long)]
    map: Option<String>,
    #[arg(long, value_enum)]
    command: Command,
    #[arg(long, default_value_t = 500)]
    horizon: usize,
    /// Sample grid resolution.
    #[arg(long, default_value_t = 64)]
    grid: usize,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long, default_value_t = 0.05)]
    threshold: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for the report and rendered artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "json")]
    format: Vec<Format>,
}

fn threads() -> Result<(), ConfigError> {
    let Ok(v) = std::env::var("KERE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| ConfigError(format!("KERE_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| ConfigError(format!("cannot size the worker pool: {e}")))
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(2),
            };
        }
    };
    if let Err(e) = threads() {
        eprintln!("kere: {e}");
        return ExitCode::from(2);
    }
    let mut formats = args.format;
    formats.sort();
    formats.dedup();
    let config = JobConfig {
        command: args.command,
        map_source: args.map,
        horizon: args.horizon,
        grid: args.grid,
        eps: args.eps,
        threshold: args.threshold,
        seed: args.seed,
        out: args.out,
        formats,
    };
    let outcome = run(&config).and_then(|o| {
        if let Some(dir) = &config.out {
            for p in o.write(dir, config.command, &config.formats)? {
                eprintln!("wrote {}", p.display());
            }
        }
        Ok(o)
    });
    match outcome {
        Ok(o) => {
            if config.out.is_none() {
                print!("{}", o.report_text());
            }
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => {
            eprintln!("kere: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("kere: internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}
