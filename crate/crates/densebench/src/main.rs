use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use densebench::commands::{self, CalibrateArgs, Corpus, CorruptArgs, EvaluateArgs, Globals, RankArgs, SubsampleArgs, SynthArgs};
use densebench::report::Task;
use densebench::{Error, Result};
use densebench_core::metrics::MetricKind;
use densebench_core::ranking::RankMethod;
use densebench_core::CorruptionKind;

#[derive(Debug, Parser)]
#[command(name = "densebench", version, about = "Corrupt stereo video, evaluate robustness, rank models")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = one per CPU).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Output root.
    #[arg(long, global = true, default_value = "densebench-out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic stereo corpus and its manifest.
    Synth {
        #[arg(long, value_enum, default_value_t = Corpus::Toy)]
        corpus: Corpus,
        /// Omit disparity and flow files.
        #[arg(long)]
        images_only: bool,
    },
    /// Corrupt every frame of a manifest.
    Corrupt {
        #[arg(long)]
        manifest: PathBuf,
        /// Comma-separated kinds, or `all`.
        #[arg(long, default_value = "all")]
        kinds: String,
        /// Severity preset from `calibrate`; reference parameters otherwise.
        #[arg(long)]
        preset: Option<PathBuf>,
    },
    /// Compare clean and corrupted prediction trees.
    Evaluate {
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        clean: PathBuf,
        #[arg(long)]
        corrupt: PathBuf,
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Comma-separated metrics (epe, 1px, fl, abs, d1, d2).
        #[arg(long)]
        metrics: Option<String>,
        /// Model name in the report; defaults to the clean directory name.
        #[arg(long)]
        model: Option<String>,
    },
    /// Rank models from reports or a pairwise matrix.
    Rank {
        #[arg(long, default_value = "schulze")]
        method: String,
        #[arg(long, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, conflicts_with = "inputs")]
        matrix: Option<PathBuf>,
        #[arg(long, default_value = "epe")]
        metric: String,
    },
    /// Tune one severity per kind to an SSIM target.
    Calibrate {
        /// Comma-separated kinds, or `all`.
        #[arg(long, default_value = "all")]
        kind: String,
        /// SSIM target; 0.2 for noises and 0.7 otherwise by default.
        #[arg(long)]
        target: Option<f64>,
        /// Corpus manifest; the built-in synthetic corpus otherwise.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Write seeded evaluation masks.
    Subsample {
        #[arg(long)]
        fraction: f64,
        #[arg(long, requires = "height")]
        width: Option<usize>,
        #[arg(long, requires = "width")]
        height: Option<usize>,
        #[arg(long, conflicts_with_all = ["width", "height"])]
        manifest: Option<PathBuf>,
        /// Hero frames as scene/camera/time.
        #[arg(long, value_delimiter = ',')]
        hero: Vec<String>,
    },
}

fn parse_kinds(s: &str) -> Result<Vec<CorruptionKind>> {
    if s == "all" {
        return Ok(CorruptionKind::ALL.to_vec());
    }
    s.split(',')
        .map(|k| CorruptionKind::parse(k.trim()).ok_or_else(|| Error::Contract(format!("unknown corruption kind {k:?}"))))
        .collect()
}

fn parse_metric(s: &str) -> Result<MetricKind> {
    MetricKind::parse(s.trim()).ok_or_else(|| Error::Contract(format!("unknown metric {s:?}")))
}

fn run(cli: Cli) -> Result<String> {
    let g = Globals {
        seed: cli.seed,
        jobs: cli.jobs,
        out: cli.out,
    };
    Ok(match cli.command {
        Command::Synth { corpus, images_only } => {
            let path = commands::synth(&g, &SynthArgs { corpus, images_only })?;
            format!("wrote {}\n", path.display())
        }
        Command::Corrupt { manifest, kinds, preset } => {
            let r = commands::corrupt(
                &g,
                &CorruptArgs {
                    manifest,
                    kinds: parse_kinds(&kinds)?,
                    preset,
                },
            )?;
            format!("wrote {} kinds x {} frames under {}\n", r.kinds.len(), r.frames_per_kind, g.out.display())
        }
        Command::Evaluate {
            task,
            clean,
            corrupt,
            mask,
            metrics,
            model,
        } => {
            let metrics = metrics
                .map(|m| m.split(',').map(parse_metric).collect::<Result<Vec<_>>>())
                .transpose()?;
            commands::evaluate(
                &g,
                &EvaluateArgs {
                    task,
                    clean,
                    corrupt,
                    mask,
                    metrics,
                    model,
                },
            )?
            .to_text()
        }
        Command::Rank {
            method,
            inputs,
            matrix,
            metric,
        } => {
            let method = RankMethod::parse(&method).ok_or_else(|| Error::Contract(format!("unknown ranking method {method:?}")))?;
            commands::rank(
                &g,
                &RankArgs {
                    method,
                    inputs,
                    matrix,
                    metric: parse_metric(&metric)?,
                },
            )?
            .to_text()
        }
        Command::Calibrate { kind, target, manifest } => {
            let preset = commands::calibrate(
                &g,
                &CalibrateArgs {
                    kinds: parse_kinds(&kind)?,
                    target,
                    manifest,
                },
            )?;
            let mut out = String::new();
            for (k, e) in &preset.kinds {
                out.push_str(&format!(
                    "{:16} theta {:.4}  ssim {:.4}  target {:.2}{}\n",
                    k.name(),
                    e.theta,
                    e.achieved_ssim,
                    e.target,
                    if e.converged { "" } else { "  NOT CONVERGED" }
                ));
            }
            out
        }
        Command::Subsample {
            fraction,
            width,
            height,
            manifest,
            hero,
        } => {
            let r = commands::subsample(
                &g,
                &SubsampleArgs {
                    fraction,
                    width,
                    height,
                    manifest,
                    hero,
                },
            )?;
            r.masks
                .iter()
                .map(|m| format!("{} {}x{} popcount {}{}\n", m.path.display(), m.width, m.height, m.popcount, if m.hero { " hero" } else { "" }))
                .collect()
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
