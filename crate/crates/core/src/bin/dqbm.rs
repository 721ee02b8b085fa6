use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use driven_qbm::config::RunConfig;
use driven_qbm::runs::{self, Command};
use driven_qbm::Error;

#[derive(Parser)]
#[command(name = "dqbm", version, about = "Driven quantum Brownian motion: band heating and pair entanglement")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file; keys not given take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. --set T_L=0.05 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    sets: Vec<String>,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Output CSV path (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Clone)]
enum Cmd {
    /// Table of Floquet components Ã_k(iω).
    Floquet(Common),
    /// Static and generalized fluctuation-dissipation residuals.
    FdrCheck(Common),
    /// Energy of band i over time: exact curve and asymptote.
    Energy(Common),
    /// Heat current into band i across the spectrum.
    Heat(Common),
    /// Entanglement spectrum E_N(ω_i)/E₀ for matched pairs.
    Spectrum(Common),
    /// E_N versus temperature with the predicted threshold.
    Threshold(Common),
    /// Discrete-bath reference run next to the analytic result.
    Oracle(Common),
    /// Energy curve at the figure's parameters.
    Figure2(Common),
    /// Spectrum panel a, b or c (--set panel=b).
    Figure3(Common),
}

impl Cmd {
    fn split(self) -> (Command, Common) {
        match self {
            Cmd::Floquet(c) => (Command::Floquet, c),
            Cmd::FdrCheck(c) => (Command::FdrCheck, c),
            Cmd::Energy(c) => (Command::Energy, c),
            Cmd::Heat(c) => (Command::Heat, c),
            Cmd::Spectrum(c) => (Command::Spectrum, c),
            Cmd::Threshold(c) => (Command::Threshold, c),
            Cmd::Oracle(c) => (Command::Oracle, c),
            Cmd::Figure2(c) => (Command::Figure2, c),
            Cmd::Figure3(c) => (Command::Figure3, c),
        }
    }
}

fn execute(command: Command, common: &Common) -> Result<i32, Error> {
    if let Some(j) = common.jobs {
        if j == 0 {
            return Err(Error::Config("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot size the worker pool: {e}")))?;
    }
    let cfg = RunConfig::load(common.config.as_deref(), &common.sets)?;
    let table = runs::run(command, &cfg)?;
    let out: Box<dyn Write> = match &common.out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    };
    let mut out = BufWriter::new(out);
    table.write_csv(&mut out)?;
    out.flush()?;
    for w in &table.warnings {
        eprintln!("warning: {w}");
    }
    for v in &table.violations {
        eprintln!("validity: {v}");
    }
    Ok(if table.violations.is_empty() { 0 } else { 3 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = cli.command.split();
    match execute(command, &common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("dqbm {}: {e}", command.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
