use clap::{Parser, Subcommand};
use hyperlog_cli::{run, Command, Config, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "hyperlog", version, about = "Numerical experiments for logarithmic semilinear equations on hyperbolic space")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// key=value config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// CSV output path (stdout if absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Run refused regimes as falsification sweeps
    #[arg(long, global = true)]
    force: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    /// Integrate the radial ODE for a list of initial values
    Shoot,
    /// Bisect for the decaying positive solution
    GroundState,
    /// Minimize the energy on the Nehari set
    Minimize,
    /// Critical-exponent threshold check
    Threshold,
    /// Barrier negativity scan
    Barrier,
    /// Log-Sobolev residual sweep
    Logsob,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Shoot => Command::Shoot,
            Cmd::GroundState => Command::GroundState,
            Cmd::Minimize => Command::Minimize,
            Cmd::Threshold => Command::Threshold,
            Cmd::Barrier => Command::Barrier,
            Cmd::Logsob => Command::Logsob,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let text = match &cli.config {
        Some(path) => match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", path.display());
                return ExitCode::from(2);
            }
        },
        None => String::new(),
    };
    let result = Config::parse(&text)
        .map_err(Into::into)
        .and_then(|cfg| run(cli.command.into(), &cfg, RunOptions { seed: cli.seed, force: cli.force }));
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &output.csv) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(3);
            }
            print!("{}", output.summary);
        }
        None => {
            print!("{}", output.csv);
            eprint!("{}", output.summary);
        }
    }
    ExitCode::from(output.exit_code() as u8)
}
