use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use lzs::config::{parse_config, Mode};
use lzs::run::{execute, metadata, resolve};

/// Floquet-Born-Markov LZS interferometry runs from a TOML config.
#[derive(Parser, Debug)]
#[command(name = "lzs", version)]
struct Cli {
    /// finite_time, steady_state, timescales, rwa_compare or isolated
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    /// values file; defaults to run.output, then <config>.csv
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// accepted for interface stability; nothing here is random
    #[arg(long)]
    seedless: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("lzs: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<(), String> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| format!("{}: {e}", cli.config.display()))?;
    let config = parse_config(&text).map_err(|e| format!("{}: {e}", cli.config.display()))?;
    if config.run.mode != cli.mode {
        return Err(format!("mode {} does not match run.mode = {} in the config", cli.mode.name(), config.run.mode.name()));
    }
    let output = cli
        .output
        .clone()
        .or_else(|| config.run.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| cli.config.with_extension("csv"));
    let meta_path = output.with_extension("meta");
    if meta_path == output {
        return Err("output path must not end in .meta".into());
    }

    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = cli.threads {
            if n == 0 {
                return Err("--threads must be ≥ 1".into());
            }
            b = b.num_threads(n);
        }
        b.build().map_err(|e| e.to_string())?
    };

    let start = Instant::now();
    let resolved = resolve(&config).map_err(|e| e.to_string())?;
    let report = pool.install(|| execute(&resolved)).map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();

    std::fs::write(&output, &report.values).map_err(|e| format!("{}: {e}", output.display()))?;
    let meta = metadata(&resolved, &report, wall, pool.current_num_threads());
    std::fs::write(&meta_path, meta).map_err(|e| format!("{}: {e}", meta_path.display()))?;

    let d = &report.diagnostics;
    eprintln!("wrote {} rows to {} in {wall:.2} s", d.rows, output.display());
    if d.flagged > 0 {
        eprintln!("{} flagged cells (see the flag column)", d.flagged);
    }
    Ok(())
}
