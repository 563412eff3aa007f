use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dda_cli::commands;
use dda_cli::config::{ExperimentConfig, Overrides};
use dda_cli::Failure;

/// Direct domain adaptation: reciprocal spectral transforms, a desk-scale
/// classifier harness, and PCA covariate-shift diagnostics.
#[derive(Parser)]
#[command(name = "dda", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration file (key = value lines).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip the DDA branch (baseline only); never touches statistics.
    #[arg(long)]
    no_dda: bool,
    /// Exit 3 unless the accuracy margins and gap reduction hold.
    #[arg(long)]
    assert_margins: bool,
    /// Paper-scale protocol: 100 epochs, batch 128, no subsampling.
    #[arg(long)]
    full_scale: bool,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let overrides = Overrides {
            seed: self.seed,
            out: self.out.clone(),
            no_dda: self.no_dda,
            assert_margins: self.assert_margins,
            full_scale: self.full_scale,
        };
        ExperimentConfig::load(&self.config, &overrides)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute and cache both domains' statistics.
    Stats(ConfigArgs),
    /// Train baseline and DDA models, evaluate, and emit all artifacts.
    Run(ConfigArgs),
    /// Write per-image transform visualizations and correlation scores.
    Transform(ConfigArgs),
    /// Fit the before/after PCA diagnostics and emit CSV/SVG artifacts.
    Pca(ConfigArgs),
    /// Materialize the synthetic datasets (IDX digits, patches, target).
    Synth(ConfigArgs),
    /// Print the header of an IDX file.
    IdxInfo { file: PathBuf },
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Stats(args) => commands::cmd_stats(&args.load()?),
        Command::Run(args) => commands::cmd_run(&args.load()?),
        Command::Transform(args) => commands::cmd_transform(&args.load()?),
        Command::Pca(args) => commands::cmd_pca(&args.load()?),
        Command::Synth(args) => commands::cmd_synth(&args.load()?),
        Command::IdxInfo { file } => commands::cmd_idx_info(&file),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.kind.exit_code() as u8)
        }
    }
}
