//! Heat current into band i for matched pairs across (0, ω_d), then at
//! ω_d − δ where the second harmonic hits the system resonance.

use driven_qbm::correlators::CorrelatorEngine;
use driven_qbm::model::{BandPair, Side, System};

fn main() -> Result<(), driven_qbm::Error> {
    let sys = System::reference();
    let wd = sys.driving.omega_d;
    let eng = CorrelatorEngine::new(sys)?;
    println!("{:>8} {:>13} {:>13} {:>13}", "omega_i", "Q_dot", "transport", "pair creat.");
    for k in 1..20 {
        let wi = wd * k as f64 / 20.0;
        let pair = BandPair::new(wi, wd - wi, 5e-4, 0.1, 0.0, 0.0).with_overlap();
        let q = eng.heat_rate(&pair, Side::R)?;
        println!("{wi:8.4} {:13.4e} {:13.4e} {:13.4e}", q.total, q.transport, q.pair_creation);
    }
    // here 2ω_d − ω_i = ω_r
    let wi = wd - sys.driving.detuning();
    let pair = BandPair::new(wi, wd - wi, 5e-4, 0.1, 0.0, 0.0).with_overlap();
    let q = eng.heat_rate(&pair, Side::R)?;
    let cf = eng.heat_rate_closed_form(&pair)?;
    println!("at omega_d - delta = {wi:.4}: Q_dot {:.4e}, leading-order closed form {:.4e}", q.total, cf.total_density);
    Ok(())
}
