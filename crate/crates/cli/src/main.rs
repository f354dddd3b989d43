use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lmbr_cli::commands::{self, VerifyMode};
use lmbr_cli::{CliError, SimConfig, EXIT_FAIL, EXIT_PASS};

/// Locally regenerating codes: build, encode, repair and certify.
#[derive(Debug, Parser)]
#[command(name = "lmbr", version)]
struct Cli {
    #[command(flatten)]
    config: SimConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the code descriptor and print the parameter summary.
    Make,
    /// Print the distance and file-size bounds.
    Bounds,
    /// Encode K symbols (raw or hex) into n shard files in --out-dir.
    Encode {
        #[arg(long)]
        input: PathBuf,
    },
    /// Recover the message from the shard files in a directory.
    Decode {
        /// Defaults to --out-dir.
        #[arg(long)]
        shard_dir: Option<PathBuf>,
        #[arg(long)]
        output: PathBuf,
        /// Write hex text instead of raw bytes.
        #[arg(long)]
        hex: bool,
    },
    /// Rebuild one shard from the others; the replacement goes to --out-dir.
    Repair {
        #[arg(long)]
        shard_dir: Option<PathBuf>,
        #[arg(long)]
        failed: usize,
    },
    /// Exhaustively certify a property of the code.
    Verify {
        #[arg(long, value_enum)]
        mode: VerifyMode,
        /// Profile to test in ura mode instead of the code's own.
        #[arg(long, value_delimiter = ',')]
        claimed_profile: Option<Vec<usize>>,
    },
    /// Seeded throughput and repair-bandwidth run.
    Bench {
        #[arg(long, default_value_t = 10)]
        trials: usize,
    },
}

fn run(cli: Cli) -> Result<commands::Report, CliError> {
    let rc = cli.config.resolve()?;
    match cli.command {
        Command::Make => commands::make(&rc),
        Command::Bounds => commands::bounds(&rc),
        Command::Encode { input } => commands::encode(&rc, &input),
        Command::Decode { shard_dir, output, hex } => {
            let dir = commands::default_shard_dir(&rc, shard_dir);
            commands::decode(&rc, &dir, &output, hex)
        }
        Command::Repair { shard_dir, failed } => {
            let dir = commands::default_shard_dir(&rc, shard_dir);
            commands::repair(&rc, &dir, failed)
        }
        Command::Verify { mode, claimed_profile } => commands::verify(&rc, mode, claimed_profile),
        Command::Bench { trials } => commands::bench(&rc, trials),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => {
            println!("{}", serde_json::to_string_pretty(&report.json).expect("json value serializes"));
            ExitCode::from(if report.pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Err(e) => {
            eprintln!("lmbr: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
