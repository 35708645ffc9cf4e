use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lrspec_cli::commands::{self, Context};
use lrspec_cli::{verify, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "lrspec", version, about = "Spectral inequalities and null control on compact groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default ./out, or output.dir from the config)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the config seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    DualTable,
    Verify,
    SpectralConstant,
    Doubling,
    Control,
    CostScan,
    Cutoff,
    CheckSymbol,
    PowerCheck,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
    let text = fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let ctx = Context::new(cfg, cli.out)?;
    match cli.command {
        Command::DualTable => commands::dual_table(&ctx),
        Command::Verify => verify::verify(&ctx),
        Command::SpectralConstant => commands::spectral_constant(&ctx),
        Command::Doubling => commands::doubling(&ctx),
        Command::Control => commands::control(&ctx),
        Command::CostScan => commands::cost_scan_cmd(&ctx),
        Command::Cutoff => commands::cutoff(&ctx),
        Command::CheckSymbol => commands::check_symbol(&ctx),
        Command::PowerCheck => verify::power_check(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lrspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
