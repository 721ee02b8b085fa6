//! Energy of a resonant band over time. After the transient the curve grows
//! linearly at the rate-equation heat current.

use driven_qbm::correlators::{CorrelatorEngine, Mode};
use driven_qbm::model::{BandPair, Side, System};

fn main() -> Result<(), driven_qbm::Error> {
    let sys = System::reference();
    let g = sys.model.gamma0;
    let wd = sys.driving.omega_d;
    let wi = wd - sys.driving.detuning();
    let pair = BandPair::new(wi, wd - wi, 5e-4, 0.1, 0.0, 0.0).with_overlap();
    let eng = CorrelatorEngine::new(sys)?;

    let q = eng.heat_rate(&pair, Side::R)?;
    println!("band {wi}: Q_dot = {:.4e} (transport {:.3e}, pair creation {:.3e})", q.total, q.transport, q.pair_creation);

    let times: Vec<f64> = (0..=10).map(|k| 2.0 * k as f64 / g).collect();
    let e = eng.band_energy(&pair, Side::R, &times, Mode::Exact)?;
    println!("{:>10} {:>14} {:>14}", "t", "E_i", "dE/dt");
    for k in 0..times.len() {
        let slope = if k > 0 { (e[k] - e[k - 1]) / (times[k] - times[k - 1]) } else { f64::NAN };
        println!("{:10.1} {:14.6e} {:14.4e}", times[k], e[k], slope);
    }
    Ok(())
}
