use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};
use snslab::runner::{run, RunOptions, Verdict};
use snslab::SUBCOMMANDS;

#[derive(Parser, Debug)]
#[command(name = "snslab", version, about = "Monte Carlo laboratory for the truncated stochastic Navier-Stokes equations")]
struct Cli {
    /// Experiment to run.
    subcommand: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; `SNSLAB_JOBS` takes precedence.
    #[arg(long)]
    jobs: Option<usize>,
}

fn subcommand_help() -> String {
    let width = SUBCOMMANDS.iter().map(|s| s.0.len()).max().unwrap_or(0);
    let mut s = String::from("Subcommands:\n");
    for (name, what) in SUBCOMMANDS {
        s.push_str(&format!("  {name:<width$}  {what}\n"));
    }
    s.push_str("\nExit status: 0 ok, 2 a verification FAILED, 1 operational error.");
    s
}

fn main() -> ExitCode {
    let cmd = Cli::command().after_help(subcommand_help());
    let matches = match cmd.clone().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cli = <Cli as clap::FromArgMatches>::from_arg_matches(&matches).expect("validated by clap");
    if !SUBCOMMANDS.iter().any(|(name, _)| *name == cli.subcommand) {
        eprintln!("error: unknown subcommand `{}`\n", cli.subcommand);
        eprintln!("{}", cmd.clone().render_usage());
        eprintln!("\n{}", subcommand_help());
        return ExitCode::from(1);
    }
    let jobs = match std::env::var("SNSLAB_JOBS") {
        Ok(v) => match v.parse() {
            Ok(n) => Some(n),
            Err(_) => {
                eprintln!("error: SNSLAB_JOBS must be a non-negative integer, got `{v}`");
                return ExitCode::from(1);
            }
        },
        Err(_) => cli.jobs,
    };
    let opts = RunOptions {
        seed: cli.seed,
        out: cli.out,
        jobs,
    };
    match run(&cli.subcommand, &cli.config, &opts) {
        Ok(summary) => {
            let v = match summary.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::None => "done",
            };
            println!("{} {v}: {}", cli.subcommand, summary.output_dir.display());
            if summary.verdict == Verdict::Fail {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
