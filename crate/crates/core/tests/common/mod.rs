#![allow(dead_code)]

use driven_qbm::model::{BandPair, System};

/// Least-squares line y = a + b x; returns (a, b, R²).
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (a, b, r2)
}

pub fn reference() -> System {
    System::reference()
}

/// Matched pair at zero temperature with the figure's band width and mass.
pub fn matched(sys: &System, omega_i: f64) -> BandPair {
    BandPair::new(omega_i, sys.driving.omega_d - omega_i, 5e-4, 0.1, 0.0, 0.0).with_overlap()
}

/// Cycle-averaging sample times: for each centre, `s + 1` points covering
/// the period that ends there.
pub fn cycle_times(centres: &[f64], period: f64, s: usize) -> Vec<f64> {
    centres
        .iter()
        .flat_map(|&c| (0..=s).map(move |k| c - period + period * k as f64 / s as f64))
        .collect()
}

/// Trapezoid means over consecutive blocks of `s + 1` values.
pub fn block_means(v: &[f64], s: usize) -> Vec<f64> {
    v.chunks(s + 1)
        .map(|b| (b[1..s].iter().sum::<f64>() + 0.5 * (b[0] + b[s])) / s as f64)
        .collect()
}
