mod common;

use common::{matched, reference};
use driven_qbm::correlators::{CorrelatorEngine, Mode};
use driven_qbm::entanglement::{log_negativity, rate_zero_t, two_mode_covariance, TwoModeCovariance};
use driven_qbm::model::{BandPair, Side};

#[test]
fn initial_state_is_the_thermal_product() {
    let sys = reference();
    let eng = CorrelatorEngine::new(sys).unwrap();
    let pair = BandPair { t_r: 0.3, t_l: 0.1, ..matched(&sys, 1.0) };
    let c0 = two_mode_covariance(&eng, &pair, 0.0, Mode::Exact).unwrap();
    let (nr, nl) = (pair.nu(Side::R).unwrap(), pair.nu(Side::L).unwrap());
    assert!((c0.sigma - TwoModeCovariance::thermal(nr, nl).sigma).abs().max() < 1e-14);
    let e = eng.band_energy(&pair, Side::R, &[0.0], Mode::Exact).unwrap();
    assert!((e[0] - 0.5 * pair.omega_i * nr).abs() < 1e-14);
}

#[test]
fn long_time_form_tracks_the_exact_covariance() {
    let sys = reference();
    let eng = CorrelatorEngine::new(sys).unwrap();
    let pair = matched(&sys, 1.0);
    let t = 20.0 / sys.model.gamma0;
    let a = two_mode_covariance(&eng, &pair, t, Mode::Exact).unwrap();
    let b = two_mode_covariance(&eng, &pair, t, Mode::Longtime).unwrap();
    let (ea, eb) = (log_negativity(&a).unwrap().e_n, log_negativity(&b).unwrap().e_n);
    assert!((ea / eb - 1.0).abs() < 1e-3, "{ea} vs {eb}");
    let grown = (a.sigma - TwoModeCovariance::vacuum().sigma).abs().max();
    assert!((a.sigma - b.sigma).abs().max() < 0.02 * grown);
}

#[test]
fn negativity_grows_linearly_for_a_matched_pair() {
    let sys = reference();
    let eng = CorrelatorEngine::new(sys).unwrap();
    let pair = matched(&sys, 1.0);
    let g = sys.model.gamma0;
    let e = |t: f64| log_negativity(&two_mode_covariance(&eng, &pair, t, Mode::Exact).unwrap()).unwrap().e_n;
    let (e10, e20) = (e(10.0 / g), e(20.0 / g));
    let slope = (e20 - e10) * g / 10.0;
    let r = rate_zero_t(&sys, &pair).unwrap();
    assert!((slope / r.gamma0 - 1.0).abs() < 0.02, "slope {slope:e} vs {:e}", r.gamma0);
}

#[test]
fn no_drive_no_growth_rate() {
    let sys = reference();
    let r = rate_zero_t(&sys.with_amplitude(0.0), &matched(&sys, 1.0)).unwrap();
    assert_eq!(r.gamma0, 0.0);
}

#[test]
fn heat_sectors_add_up() {
    let sys = reference();
    let eng = CorrelatorEngine::new(sys).unwrap();
    for wi in [0.05, 1.0, 3.9] {
        let pair = BandPair { t_l: 0.05, ..matched(&sys, wi) };
        let q = eng.heat_rate(&pair, Side::R).unwrap();
        assert!((q.transport + q.pair_creation - q.total).abs() <= 1e-12 * q.total.abs());
        assert!(q.pair_creation >= 0.0);
    }
}
