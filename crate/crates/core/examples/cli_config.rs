//! What the `dqbm` binary does: load a config with overrides, run one
//! command, write the CSV with its JSON header.

use driven_qbm::config::RunConfig;
use driven_qbm::runs::{self, Command};

fn main() -> Result<(), driven_qbm::Error> {
    let overrides = ["omega_min=0.5".to_string(), "omega_max=8.0".to_string(), "grid_points=8".to_string()];
    let cfg = RunConfig::load(None, &overrides)?;
    let table = runs::run(Command::Floquet, &cfg)?;
    table.write_csv(&mut std::io::stdout().lock())?;

    // unknown keys are configuration errors (exit code 2 from the binary)
    let err = RunConfig::load(None, &["omega_typo=1".to_string()]).unwrap_err();
    eprintln!("rejected: {err} (exit code {})", err.exit_code());
    Ok(())
}
