//! Batch driver for geobarrier scenes.

mod run;
mod validate;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use geobarrier::potential::PotentialKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Potential {
    Geometric,
    Ipc,
}

impl From<Potential> for PotentialKind {
    fn from(p: Potential) -> Self {
        match p {
            Potential::Geometric => PotentialKind::Geometric,
            Potential::Ipc => PotentialKind::Ipc,
        }
    }
}

/// Run a contact scene with implicit Euler and write per-step diagnostics.
///
/// Set THREADS to cap the number of worker threads.
#[derive(Debug, Parser)]
#[command(name = "geobarrier", version)]
pub struct Args {
    /// Scene file (JSON).
    #[arg(long)]
    pub scene: PathBuf,
    /// Output directory for summary.csv, terms.csv and OBJ frames.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Contact model.
    #[arg(long, value_enum, default_value_t = Potential::Geometric)]
    pub potential: Potential,
    /// Number of time steps.
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    /// Also write every active contact term of every frame to terms.csv.
    #[arg(long)]
    pub dump_terms: bool,
    /// Check the scene and print a report instead of simulating.
    #[arg(long)]
    pub validate_only: bool,
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(v) = std::env::var("THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|e| anyhow::anyhow!("THREADS={v:?}: {e}"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();
    let result = init_threads().and_then(|()| {
        if args.validate_only {
            let report = validate::validate(&args.scene);
            // a closed pipe is not an error for a report
            let _ = write!(std::io::stdout(), "{report}");
            Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        } else {
            run::run(&args).map(|()| ExitCode::SUCCESS)
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
