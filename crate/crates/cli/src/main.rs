use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use wallforge::acceptance::AcceptanceOptions;
use wallforge::stability::Mutation;
use wallforge_cli::run::{run, OUTPUT_DIR_ENV};
use wallforge_cli::verify::verify_all;

#[derive(Parser)]
#[command(name = "wallforge", version, about = "Domain walls in nanowires of variable cross section")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum MutationArg {
    None,
    FlipL0Potential,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses of a TOML config and write report.json / profile.csv.
    Run {
        config: PathBuf,
        /// Output directory; overrides both the config and the environment.
        #[arg(long)]
        output_dir: Option<PathBuf>,
    },
    /// Run the acceptance suite and print one line per criterion.
    Verify {
        #[arg(long, default_value_t = wallforge::grid::DEFAULT_CELLS_PER_UNIT)]
        cells_per_unit: usize,
        /// Inject a known defect to check that the suite catches it.
        #[arg(long, value_enum, default_value_t = MutationArg::None)]
        mutate: MutationArg,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, output_dir } => {
            let dir = output_dir.or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from));
            let outcome = run(&config, dir);
            match &outcome.report.error {
                Some(e) => eprintln!("wallforge: {}: {}", e.kind, e.message),
                None => {
                    for name in outcome.report.failed_flags() {
                        eprintln!("wallforge: check failed: {name}");
                    }
                }
            }
            println!("{}", outcome.output_dir.join(wallforge_cli::run::REPORT_FILE).display());
            outcome.exit_code
        }
        Command::Verify { cells_per_unit, mutate } => {
            let mutation = match mutate {
                MutationArg::None => Mutation::None,
                MutationArg::FlipL0Potential => Mutation::FlipL0Potential,
            };
            verify_all(&AcceptanceOptions { cells_per_unit, mutation, ..Default::default() })
        }
    };
    ExitCode::from(code as u8)
}
