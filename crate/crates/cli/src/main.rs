use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use involutive_cli::runner::{resolve_output_dir, OUTPUT_DIR_ENV};
use involutive_cli::{catalog, config, exit, prepare, run, Overrides};

#[derive(Parser)]
#[command(name = "involutive", version, about = "Run involutive MCMC experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and $INVOLUTIVE_OUTPUT_DIR).
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of chains (overrides the config).
        #[arg(long)]
        chains: Option<usize>,
    },
    /// Check a config without running it.
    Validate { config: PathBuf },
    /// List builtin targets and samplers.
    List,
}

fn load(path: &Path, overrides: &Overrides) -> Result<involutive_cli::Experiment, ExitCode> {
    config::load(path)
        .and_then(|l| prepare(&l, overrides))
        .map_err(|e| {
            eprintln!("error: {}: {e}", path.display());
            ExitCode::from(exit::CONFIG)
        })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(exit::CONFIG);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(exit::OK);
        }
    };
    match cli.command {
        Command::List => {
            print!("{}", catalog::render());
            ExitCode::from(exit::OK)
        }
        Command::Validate { config } => match load(&config, &Overrides::default()) {
            Ok(exp) => {
                println!(
                    "{}: ok ({} on dimension {})",
                    config.display(),
                    exp.config.sampler.name(),
                    exp.dim()
                );
                ExitCode::from(exit::OK)
            }
            Err(code) => code,
        },
        Command::Run {
            config,
            output_dir,
            seed,
            chains,
        } => {
            let overrides = Overrides {
                output_dir,
                seed,
                chains,
            };
            let exp = match load(&config, &overrides) {
                Ok(e) => e,
                Err(code) => return code,
            };
            let env = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from);
            let out = resolve_output_dir(&exp.config, env);
            match run(&exp, &out) {
                Ok(summary) => {
                    for c in &summary.chains {
                        match (&c.error, &c.summary) {
                            (Some(e), _) => eprintln!("chain {}: failed after {} steps: {e}", c.chain, c.steps_completed),
                            (None, Some(s)) => println!(
                                "chain {}: {} steps, acceptance {:.4}",
                                c.chain, c.steps_completed, s.acceptance_rate
                            ),
                            (None, None) => println!("chain {}: {} steps", c.chain, c.steps_completed),
                        }
                    }
                    println!("wrote {}", out.display());
                    if summary.failed() {
                        ExitCode::from(exit::RUNTIME)
                    } else {
                        ExitCode::from(exit::OK)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit::RUNTIME)
                }
            }
        }
    }
}
