//! Log negativity of a matched pair against the linear prediction
//! max(0, −S + Γ_N t), cold and with both baths warm.

use driven_qbm::correlators::{CorrelatorEngine, Mode};
use driven_qbm::entanglement::{cycle_averaged_negativity, rate_finite_t, MIN_SAMPLES_PER_PERIOD};
use driven_qbm::model::{BandPair, System};

fn main() -> Result<(), driven_qbm::Error> {
    let sys = System::reference();
    let g = sys.model.gamma0;
    let wd = sys.driving.omega_d;
    let eng = CorrelatorEngine::new(sys)?;

    for temp in [0.0, 0.08] {
        let pair = BandPair::new(1.0, wd - 1.0, 5e-4, 0.1, temp, temp);
        let r = rate_finite_t(&sys, &pair)?;
        println!(
            "T = {temp}: Gamma0 = {:.4e}, Gamma_N = {:.4e}, S = {:.3e}, latency {:?}",
            r.gamma0, r.gamma_n, r.s_ij, r.latency()
        );
        println!("{:>8} {:>13} {:>13}", "t", "E_N", "predicted");
        for k in 1..=4 {
            let t = 5.0 * k as f64 / g;
            let e = cycle_averaged_negativity(&eng, &pair, t, MIN_SAMPLES_PER_PERIOD, Mode::Exact)?;
            println!("{t:8.0} {e:13.5e} {:13.5e}", r.predicted(t));
        }
    }
    Ok(())
}
