use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use segkit_cli::commands::{self, CaseInput};
use segkit_cli::{Method, Overrides, RunConfig};

#[derive(Parser)]
#[command(
    name = "segkit",
    version,
    about = "Bounding-box seeded tumor segmentation and evaluation"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    /// TOML config file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for phantom generation.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for batch runs.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Segmentation method. `batch` accepts it more than once.
    #[arg(long, global = true, value_enum)]
    method: Vec<Method>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Segment one image inside a bounding box.
    Segment {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        bbox: PathBuf,
        /// Reference mask; adds a score report to the case record.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Case id used to name outputs. Defaults to the image file stem.
        #[arg(long)]
        id: Option<String>,
        /// Also write the input with the mask boundary drawn on it.
        #[arg(long)]
        overlay: bool,
    },
    /// Score a predicted mask against a reference mask.
    Evaluate {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
    /// Generate a noisy phantom image, its mask and its bounding box.
    Phantom {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Aggregate the case records in a directory.
    Report {
        #[arg(long)]
        records: PathBuf,
    },
    /// List anchors and evaluate the proposal loss for an anchor batch.
    RpnDemo {
        /// Anchor batch or anchor request JSON.
        #[arg(long)]
        batch: PathBuf,
    },
    /// Segment every case of a manifest in parallel and write a report.
    Batch {
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn print_json<T: serde::Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn single_method(methods: &[Method]) -> Result<Method> {
    match methods {
        [] => Ok(Method::Chanvese),
        [m] => Ok(*m),
        _ => anyhow::bail!("this subcommand takes a single --method"),
    }
}

fn run(cli: Cli) -> Result<()> {
    let overrides = Overrides {
        out: cli.common.out.clone(),
        seed: cli.common.seed,
        jobs: cli.common.jobs,
    };
    let cfg = RunConfig::resolve(cli.common.config.as_deref(), &overrides)?;
    match cli.cmd {
        Cmd::Segment {
            image,
            bbox,
            truth,
            id,
            overlay,
        } => {
            let id = match id {
                Some(id) => id,
                None => image
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .context("cannot derive a case id from the image path; pass --id")?
                    .to_string(),
            };
            let input = CaseInput {
                id,
                image,
                bbox,
                truth,
                method: single_method(&cli.common.method)?,
            };
            let (record, paths) = commands::segment(&cfg, &input, overlay)?;
            for p in paths {
                log::info!("wrote {}", p.display());
            }
            print_json(&record)
        }
        Cmd::Evaluate { pred, truth } => print_json(&commands::evaluate(&cfg, &pred, &truth)?),
        Cmd::Phantom { spec } => {
            let (_, paths) = commands::phantom(&cfg, &spec)?;
            for p in paths {
                println!("{}", p.display());
            }
            Ok(())
        }
        Cmd::Report { records } => {
            let (_, text) = commands::report(&cfg, &records)?;
            print!("{text}");
            Ok(())
        }
        Cmd::RpnDemo { batch } => {
            let path = cfg.input_path(&batch);
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            print_json(&commands::rpn_demo(&text)?)
        }
        Cmd::Batch { manifest } => {
            let agg = commands::batch(&cfg, &manifest, &cli.common.method)?;
            print!("{}", segkit_cli::report::render_text(&agg));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SEG_LOG_LEVEL", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
