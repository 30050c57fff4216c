use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use voxcog::cli::{cmd_crossval, cmd_evaluate, cmd_pretrain, cmd_report, cmd_synth};
use voxcog::config::RunConfig;
use voxcog::evaluator::EvalMode;
use voxcog::Result;

/// Speech-based cognitive-impairment classification with dialect-pretrained
/// transfer.
#[derive(Parser)]
#[command(name = "voxcog", version, about)]
struct Cli {
    /// Cap on worker threads (default: all cores); results are identical
    /// either way
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration (defaults apply when omitted)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the seed from the config document
    #[arg(long)]
    seed: Option<u64>,
}

impl Common {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.config.as_deref())?;
        if let Some(seed) = self.seed {
            cfg.train.seed = seed;
            cfg.corpus.seed = seed;
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dialect/impairment corpus
    Synth {
        #[command(flatten)]
        common: Common,
        /// Output directory for WAVE files and manifests
        #[arg(long)]
        out: PathBuf,
    },
    /// Train the dialect classifier and save a pretrain checkpoint
    Pretrain {
        #[command(flatten)]
        common: Common,
        /// JSONL manifest with dialect labels
        #[arg(long)]
        manifest: PathBuf,
        /// Checkpoint path to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Stratified k-fold cross-validated fine-tuning
    Crossval {
        #[command(flatten)]
        common: Common,
        /// JSONL manifest of downstream subjects
        #[arg(long)]
        manifest: PathBuf,
        /// Pretrain checkpoint for the transfer arm; omit for the baseline
        /// arm
        #[arg(long)]
        init: Option<PathBuf>,
        /// Override the fold count from the config document
        #[arg(long)]
        k: Option<usize>,
        /// Output directory for fold checkpoints and the report
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a manifest with saved fold models
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Directory of .vxcg fold checkpoints
        #[arg(long)]
        models: PathBuf,
        /// JSONL manifest to score
        #[arg(long)]
        manifest: PathBuf,
        /// fold_average or fold_ensemble
        #[arg(long)]
        mode: String,
        /// Report JSON path to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare baseline and transfer arms across run directories
    Report {
        /// Run directories, each holding baseline/ and transfer/ crossval
        /// outputs
        #[arg(long, required = true, num_args = 1..)]
        runs: Vec<PathBuf>,
        /// Optional JSON output path
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { common, out } => {
            let cfg = common.load()?;
            cmd_synth(&cfg, &out)
        }
        Command::Pretrain { common, manifest, out } => {
            let cfg = common.load()?;
            cmd_pretrain(&cfg, &manifest, &out)
        }
        Command::Crossval { common, manifest, init, k, out } => {
            let mut cfg = common.load()?;
            if let Some(k) = k {
                cfg.k = k;
            }
            cfg.validate()?;
            cmd_crossval(&cfg, &manifest, init.as_deref(), &out)?;
            Ok(())
        }
        Command::Evaluate { common, models, manifest, mode, out } => {
            let cfg = common.load()?;
            let mode: EvalMode = mode.parse()?;
            cmd_evaluate(&cfg, &models, &manifest, mode, &out)?;
            Ok(())
        }
        Command::Report { runs, out } => {
            cmd_report(&runs, out.as_deref())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
