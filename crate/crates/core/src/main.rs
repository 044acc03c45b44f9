use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use radlib::app::{run, RunOptions};
use radlib::config::load_config;
use radlib::export::read_csv;
use radlib::identify::{qualify_peaks, render_matches, PeakList};
use radlib::model::RadiationType;

#[derive(Parser)]
#[command(name = "radlib", version, about = "Generate radionuclide libraries from decay chains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the libraries described by a YAML configuration.
    Generate {
        config: PathBuf,
        /// Use only cached datasets.
        #[arg(long)]
        offline: bool,
        #[arg(long, value_name = "PATH")]
        cache_dir: Option<PathBuf>,
        /// Ignore and do not update the absent-dataset registry.
        #[arg(long)]
        no_registry: bool,
        #[arg(long, value_name = "PATH", default_value = "radlib-out")]
        out_dir: PathBuf,
        /// Number of jobs run concurrently.
        #[arg(long, value_name = "N", default_value_t = 1)]
        jobs: usize,
    },
    /// Match peak centroids against a library CSV.
    Qualify {
        peaks: PathBuf,
        library: PathBuf,
        #[arg(long, value_name = "KEV")]
        tol_kev: f64,
        /// Print JSON instead of text.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Generate { config, offline, cache_dir, no_registry, out_dir, jobs } => {
            let cfg = load_config(&config)?;
            let opts =
                RunOptions { out_dir, offline, no_registry, cache_dir, base_url: None, parallel_jobs: jobs }.with_env();
            let report = run(&cfg, &opts)?;
            print!("{}", report.to_text());
            Ok(report.success())
        }
        Command::Qualify { peaks, library, tol_kev, json } => {
            anyhow::ensure!(tol_kev > 0.0 && tol_kev.is_finite(), "--tol-kev must be positive");
            let peaks = PeakList::load(&peaks)?;
            let lib =
                read_csv(&library, RadiationType::Gamma).with_context(|| format!("reading {}", library.display()))?;
            let matches = qualify_peaks(&peaks, &lib, tol_kev);
            if json {
                println!("{}", serde_json::to_string_pretty(&matches)?);
            } else {
                print!("{}", render_matches(&matches));
            }
            Ok(true)
        }
    }
}
