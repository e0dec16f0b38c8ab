use clap::Parser;
use confscat::harness::{run_experiment, ExperimentConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Runs one experiment suite and writes its reports.
#[derive(Parser, Debug)]
#[command(name = "confscat", version)]
struct Cli {
    /// cauchy, hoermander, picard, glue, scatter, energy-audit, lemma-audit or convergence.
    suite: String,
    /// Configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides run.out).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampled audits (overrides run.seed).
    #[arg(long)]
    seed: Option<u64>,
}

fn threads() -> Result<usize, String> {
    match std::env::var("CONFSCAT_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => v.trim().parse().map_err(|_| format!("configuration error: CONFSCAT_THREADS: cannot parse {v:?}")),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let setup = || -> Result<ExperimentConfig, String> {
        let n = threads()?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| format!("configuration error: {e}"))?;
        let mut cfg = ExperimentConfig::load(&cli.config).map_err(|e| e.to_string())?;
        if let Some(out) = &cli.out {
            cfg.out = out.clone();
        }
        if let Some(seed) = cli.seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    };
    let cfg = match setup() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&cfg, &cli.suite) {
        Ok(r) => r,
        Err(e @ confscat::Error::Config(_)) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("suite {} failed: {e}", cli.suite);
            return ExitCode::from(1);
        }
    };
    if let Err(e) = report.write(&cfg.out) {
        eprintln!("{e}");
        return ExitCode::from(1);
    }
    print!("{}", report.summary());
    ExitCode::from(report.exit_code() as u8)
}
