//! Discrete-bath reference against the continuum correlators for one pair.
//! Takes a minute or so in release mode.

use driven_qbm::correlators::{CorrelatorEngine, Mode};
use driven_qbm::entanglement::{log_negativity, two_mode_covariance};
use driven_qbm::oracle::{DiscreteBath, FloquetOracle, GridLayout, OracleOptions};
use driven_qbm::model::{BandPair, System};

fn main() -> Result<(), driven_qbm::Error> {
    let sys = System::reference();
    let g = sys.model.gamma0;
    let wd = sys.driving.omega_d;
    let pair = BandPair::new(1.0, wd - 1.0, 5e-4, 0.1, 0.0, 0.0);
    let horizon = 5.0 / g;

    let layout = GridLayout::for_pair(&sys, pair.omega_i, pair.omega_j, pair.delta_omega);
    let bath = DiscreteBath::windowed(&sys.model, &layout, pair.m_i)?;
    bath.check_horizon(horizon, 2.0)?;
    println!("{} modes, recurrence time {:.0}", bath.len(), bath.recurrence_time());
    let tracked = bath.band_modes.clone();
    let periods = (horizon / sys.driving.period()).ceil() as usize + 1;
    let oracle = FloquetOracle::new(bath, sys.driving, tracked, periods, OracleOptions::default())?;

    let eng = CorrelatorEngine::new(sys)?;
    println!("{:>8} {:>13} {:>13}", "t", "E_N exact", "E_N oracle");
    for k in 1..=5 {
        let (n, j) = oracle.slot(k as f64 / g);
        let t = oracle.time(n, j);
        let exact = log_negativity(&two_mode_covariance(&eng, &pair, t, Mode::Exact)?)?.e_n;
        let disc = log_negativity(&oracle.two_mode(0, 1, n, j, (0.0, 0.0))?)?.e_n;
        println!("{t:8.1} {exact:13.5e} {disc:13.5e}");
    }
    Ok(())
}
