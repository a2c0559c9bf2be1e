use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emla_sens::{run, Format, RunOptions};

#[derive(Parser)]
#[command(version, about = "Payload sensitivity of EMLA-driven manipulators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the payload grid of a run config and write the results.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also write SVG charts.
    #[arg(long)]
    plots: bool,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    parallel: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Validate and print the plan without computing anything.
    #[arg(long)]
    dry_run: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EMLA_SENS_LOG", "warn")).init();
    let Command::Run(args) = Cli::parse().command;
    let opts = RunOptions {
        config: args.config,
        out: args.out,
        plots: args.plots,
        parallel: args.parallel,
        format: args.format,
        dry_run: args.dry_run,
    };
    match run(&opts) {
        Ok(outcome) => {
            if let Some(report) = outcome.report {
                println!(
                    "{} payloads, {} files written to {} (max tracking error {:.3e} m)",
                    report.entries.len(),
                    outcome.files.len(),
                    opts.out.display(),
                    report.max_tracking_error
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
