//! Entanglement-breaking temperatures across the band, then E_N of one pair
//! just below and well above its threshold.

use driven_qbm::correlators::{CorrelatorEngine, Mode};
use driven_qbm::entanglement::{cycle_averaged_negativity, PairThreshold, MIN_SAMPLES_PER_PERIOD};
use driven_qbm::model::{BandPair, System};

fn main() -> Result<(), driven_qbm::Error> {
    let sys = System::reference();
    let g = sys.model.gamma0;
    let wd = sys.driving.omega_d;
    println!("{:>8} {:>12} {:>12} {:>12}", "omega_i", "n*", "T*/g0", "Ohmic T*/g0");
    for k in 1..11 {
        let wi = wd * k as f64 / 11.0;
        let th = PairThreshold::new(&sys, &BandPair::new(wi, wd - wi, 5e-4, 0.1, 0.0, 0.0).with_overlap())?;
        println!("{wi:8.4} {:12.4e} {:12.2} {:12.2}", th.right.n_star, th.symmetric() / g, th.right.t_star_ohmic / g);
    }

    let eng = CorrelatorEngine::new(sys)?;
    let base = BandPair::new(wd / 2.0, wd / 2.0, 5e-4, 0.1, 0.0, 0.0).with_overlap();
    let t_star = PairThreshold::new(&sys, &base)?.symmetric();
    for f in [0.7, 1.5] {
        let pair = BandPair { t_r: f * t_star, t_l: f * t_star, ..base };
        let e = cycle_averaged_negativity(&eng, &pair, 20.0 / g, MIN_SAMPLES_PER_PERIOD, Mode::Exact)?;
        println!("omega_d/2 pair at {f} T*: E_N(20/g0) = {e:.4e}");
    }
    Ok(())
}
