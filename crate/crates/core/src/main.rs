use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use formality::commands::{apply_overrides, run_command, Command, Overrides};
use formality::report::emit_report;
use formality::spec::load_spec;
use formality::Error;

#[derive(Parser)]
#[command(name = "formality", version, about = "Exact Fedosov resolutions, formality maps and star products on R^d")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Run identity suites
    Check(Common),
    /// Build and print the Fedosov connection and curvature
    Connection(Common),
    /// Build the star product
    Star(Common),
    /// Run the group invariance checks
    Equivariance(Common),
}

#[derive(Args)]
struct Common {
    /// Manifold spec file
    #[arg(long)]
    spec: PathBuf,
    /// Override the truncation order
    #[arg(long)]
    order: Option<u32>,
    /// Override the hbar order
    #[arg(long)]
    hbar: Option<u32>,
    /// Identity suite for `check`
    #[arg(long, default_value = "all")]
    suite: String,
    /// Write the report here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cmd: Command, args: &Common) -> Result<bool, Error> {
    let spec = load_spec(&args.spec)?;
    let spec = apply_overrides(spec, &Overrides { order: args.order, hbar: args.hbar })?;
    let (report, ok) = run_command(cmd, &spec, &args.suite)?;
    let text = emit_report(&report, args.out.as_deref())?;
    if args.out.is_none() {
        print!("{text}");
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Sub::Check(a) => (Command::Check, a),
        Sub::Connection(a) => (Command::Connection, a),
        Sub::Star(a) => (Command::Star, a),
        Sub::Equivariance(a) => (Command::Equivariance, a),
    };
    match run(cmd, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("formality: one or more identities failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("formality: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
