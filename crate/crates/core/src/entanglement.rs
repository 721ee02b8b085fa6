//! Two-mode Gaussian entanglement between an R band and an L band.
//!
//! Covariances use the dimensionless quadratures of [`crate::correlators`]
//! with the vacuum at 𝟙/2, and the logarithmic negativity uses the natural
//! log: E_N = max(0, −ln 2ν̃₋).

use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::correlators::{CorrelatorEngine, Mode};
use crate::error::{Error, Result};
use crate::floquet::static_green;
use crate::model::{planck_occupation, BandPair, Side, System};
use crate::special::sinc;

/// Relative mismatch |ω_i + ω_j − ω_d|/ω_d accepted as matched.
pub const MATCH_TOLERANCE: f64 = 1e-9;

/// Minimum samples per drive period for [`cycle_average`].
pub const MIN_SAMPLES_PER_PERIOD: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeCovariance {
    /// Order (x_i, p_i, x_j, p_j).
    pub sigma: Matrix4<f64>,
    pub t: f64,
    pub warnings: Vec<String>,
}

fn omega4() -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    o[(0, 1)] = 1.0;
    o[(1, 0)] = -1.0;
    o[(2, 3)] = 1.0;
    o[(3, 2)] = -1.0;
    o
}

impl TwoModeCovariance {
    pub fn new(sigma: Matrix4<f64>, t: f64) -> Self {
        TwoModeCovariance { sigma: 0.5 * (sigma + sigma.transpose()), t, warnings: Vec::new() }
    }

    pub fn from_array(s: [[f64; 4]; 4], t: f64) -> Self {
        Self::new(Matrix4::from_fn(|r, c| s[r][c]), t)
    }

    pub fn vacuum() -> Self {
        Self::new(Matrix4::identity() * 0.5, 0.0)
    }

    /// Product of thermal states, diag(ν_i, ν_i, ν_j, ν_j)/2.
    pub fn thermal(nu_i: f64, nu_j: f64) -> Self {
        Self::new(Matrix4::from_diagonal(&nalgebra::Vector4::new(nu_i, nu_i, nu_j, nu_j)) * 0.5, 0.0)
    }

    /// Two-mode squeezed vacuum with squeezing r.
    pub fn squeezed(r: f64) -> Self {
        let (c, s) = ((2.0 * r).cosh() * 0.5, (2.0 * r).sinh() * 0.5);
        let mut m = Matrix4::identity() * c;
        m[(0, 2)] = s;
        m[(2, 0)] = s;
        m[(1, 3)] = -s;
        m[(3, 1)] = -s;
        Self::new(m, 0.0)
    }

    pub fn alpha(&self) -> Matrix2<f64> {
        self.sigma.fixed_view::<2, 2>(0, 0).into()
    }

    pub fn beta(&self) -> Matrix2<f64> {
        self.sigma.fixed_view::<2, 2>(2, 2).into()
    }

    pub fn gamma(&self) -> Matrix2<f64> {
        self.sigma.fixed_view::<2, 2>(0, 2).into()
    }

    /// Smallest eigenvalue of σ + iΩ/2; negative means unphysical.
    pub fn physicality(&self) -> f64 {
        let o = omega4();
        let h = nalgebra::Matrix4::<Complex<f64>>::from_fn(|r, c| Complex::new(self.sigma[(r, c)], 0.5 * o[(r, c)]));
        SymmetricEigen::new(h).eigenvalues.min()
    }

    /// Same state with the two modes exchanged.
    pub fn swapped(&self) -> Self {
        let p = [2, 3, 0, 1];
        let m = Matrix4::from_fn(|r, c| self.sigma[(p[r], p[c])]);
        TwoModeCovariance { sigma: m, t: self.t, warnings: self.warnings.clone() }
    }

    /// Partial transpose on mode j (p_j → −p_j).
    pub fn partial_transpose(&self) -> Matrix4<f64> {
        let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0));
        d * self.sigma * d
    }
}

/// Symplectic eigenvalues (ascending, each once) of a positive definite 4×4
/// covariance, from the Hermitian matrix i S^{1/2} Ω S^{1/2}.
pub fn symplectic_eigenvalues(s: &Matrix4<f64>) -> Result<[f64; 2]> {
    let eig = SymmetricEigen::new(*s);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::Validity(format!(
            "covariance is not positive definite (min eigenvalue {:.3e})",
            eig.eigenvalues.min()
        )));
    }
    let root = eig.eigenvectors
        * Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let m = root * omega4() * root;
    let h = Matrix4::<Complex<f64>>::from_fn(|r, c| Complex::new(0.0, m[(r, c)]));
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().filter(|&x| x > 0.0).collect();
    ev.sort_by(f64::total_cmp);
    match ev.as_slice() {
        [a, b] => Ok([*a, *b]),
        _ => Err(Error::Degenerate("symplectic spectrum is not ±ν pairs".into())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Negativity {
    pub e_n: f64,
    pub nu_tilde_minus: f64,
}

/// Logarithmic negativity from the smallest symplectic eigenvalue of the
/// partially transposed covariance.
pub fn log_negativity(cov: &TwoModeCovariance) -> Result<Negativity> {
    let a = cov.alpha().determinant();
    let b = cov.beta().determinant();
    let g = cov.gamma().determinant();
    let d = cov.sigma.determinant();
    let dt = a + b - 2.0 * g;
    let disc = dt * dt - 4.0 * d;
    if disc < -1e-10 * dt * dt {
        return Err(Error::Degenerate(format!("negative symplectic discriminant {disc:.3e}")));
    }
    // the closed form loses ~1e-8 to cancellation near the vacuum, so the
    // eigenvalue comes from the Hermitian route instead
    let nu = symplectic_eigenvalues(&cov.partial_transpose())?[0];
    Ok(Negativity { e_n: (-(2.0 * nu).ln()).max(0.0), nu_tilde_minus: nu })
}

/// σ(t) of the band pair.
pub fn two_mode_covariance(engine: &CorrelatorEngine, pair: &BandPair, t: f64, mode: Mode) -> Result<TwoModeCovariance> {
    let c = engine.covariance(pair, t, mode)?;
    let mut cov = TwoModeCovariance::from_array(c.sigma, t);
    cov.warnings = c.warnings;
    Ok(cov)
}

/// Growth rates of E_N for matched bands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthRates {
    pub gamma0: f64,
    pub gamma_n: f64,
    pub s_ij: f64,
    /// Unit γ₀ΔωV/ω_r³.
    pub e0: f64,
}

impl GrowthRates {
    /// S_ij/Γ_N, or None if entanglement never starts.
    pub fn latency(&self) -> Option<f64> {
        (self.gamma_n > 0.0).then(|| self.s_ij / self.gamma_n)
    }

    /// max(0, −S_ij + Γ_N t).
    pub fn predicted(&self, t: f64) -> f64 {
        (self.gamma_n * t - self.s_ij).max(0.0)
    }
}

fn check_matched(system: &System, pair: &BandPair) -> Result<()> {
    let wd = system.driving.omega_d;
    if (pair.omega_i + pair.omega_j - wd).abs() > MATCH_TOLERANCE * wd {
        return Err(Error::Contract(format!(
            "bands {} + {} do not match the drive frequency {wd}; use detuned_envelope",
            pair.omega_i, pair.omega_j
        )));
    }
    Ok(())
}

struct RateParts {
    pref: f64,
    z: Complex64,
    e0: f64,
}

fn rate_parts(system: &System, pair: &BandPair) -> Result<RateParts> {
    check_matched(system, pair)?;
    let m = system.model.mass;
    let v1 = system.driving.fourier(1).norm();
    let gi = static_green(system, Complex64::new(0.0, pair.omega_i))?;
    let gj = static_green(system, Complex64::new(0.0, pair.omega_j))?;
    let ir = system.band_density(Side::R, pair.omega_i);
    let il = system.band_density(Side::L, pair.omega_j);
    let d = &system.driving;
    Ok(RateParts {
        pref: pair.delta_omega * v1 * (ir * il).sqrt() / m,
        z: gi * gj.conj(),
        e0: system.model.gamma0 * pair.delta_omega * d.amplitude / d.omega_r.powi(3),
    })
}

/// Γ₀ = Δω|V₁|√(I_R(ω_i)I_L(ω_j))|Re g̃_i g̃_j*|/m at zero temperature,
/// with V₁ the first Fourier coefficient of the drive.
pub fn rate_zero_t(system: &System, pair: &BandPair) -> Result<GrowthRates> {
    let p = rate_parts(system, pair)?;
    let g0 = p.pref * p.z.re.abs();
    Ok(GrowthRates { gamma0: g0, gamma_n: g0, s_ij: 0.0, e0: p.e0 })
}

/// Thermal offset S_ij and the finite-temperature rate Γ_N.
pub fn rate_finite_t(system: &System, pair: &BandPair) -> Result<GrowthRates> {
    let p = rate_parts(system, pair)?;
    let nr = pair.nu(Side::R)?;
    let nl = pair.nu(Side::L)?;
    let two_s = (0.5 * (nr * nr + nl * nl)).ln();
    // Γ₀/|2 Re z| · |ν_R z + ν_L z*| written without the division
    let gamma_n = p.pref * (-two_s).exp() * 0.25 * (nr + nl) * (nr * p.z + nl * p.z.conj()).norm();
    Ok(GrowthRates { gamma0: p.pref * p.z.re.abs(), gamma_n, s_ij: 0.5 * two_s, e0: p.e0 })
}

/// |sinc(εt)|·t: the factor replacing t in E_N when ω_i + ω_j = ω_d + ε.
pub fn detuned_envelope(epsilon: f64, t: f64) -> f64 {
    sinc(epsilon * t).abs() * t
}

/// Occupation bound below which a band stays entangled at long times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub side: Side,
    pub omega: f64,
    /// ε/2 = Δω I_α(ω)/(2 m_i ω³) with the configured bath density.
    pub n_star: f64,
    pub t_star: f64,
    /// (2/π)(γ₀/2ω)(Δω/ω)(m/m_i): the Ohmic form without the bath split.
    pub n_star_ohmic: f64,
    pub t_star_ohmic: f64,
}

/// Temperature at which the Planck occupation of `omega` equals `n`, by
/// bisection to `tol`.
pub fn temperature_for_occupation(omega: f64, n: f64, tol: f64) -> Result<f64> {
    if !(omega > 0.0 && n > 0.0 && tol > 0.0) {
        return Err(Error::Domain(format!("need omega, n, tol > 0 (got {omega}, {n}, {tol})")));
    }
    let mut lo = 0.0;
    let mut hi = omega;
    while planck_occupation(omega, hi)? < n {
        hi *= 2.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if planck_occupation(omega, mid)? < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn breaking_threshold(system: &System, side: Side, omega: f64, delta_omega: f64, m_i: f64) -> Result<Threshold> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("band frequency must be > 0, got {omega}")));
    }
    let model = &system.model;
    let n_star = 0.5 * delta_omega * system.band_density(side, omega) / (m_i * omega.powi(3));
    let n_star_ohmic = (2.0 / PI) * (model.gamma0 / (2.0 * omega)) * (delta_omega / omega) * (model.mass / m_i);
    let tol = 1e-3 * model.gamma0;
    Ok(Threshold {
        side,
        omega,
        n_star,
        t_star: temperature_for_occupation(omega, n_star, tol)?,
        n_star_ohmic,
        t_star_ohmic: temperature_for_occupation(omega, n_star_ohmic, tol)?,
    })
}

/// Both bands' thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairThreshold {
    pub right: Threshold,
    pub left: Threshold,
}

impl PairThreshold {
    pub fn new(system: &System, pair: &BandPair) -> Result<Self> {
        Ok(PairThreshold {
            right: breaking_threshold(system, Side::R, pair.omega_i, pair.delta_omega, pair.m_i)?,
            left: breaking_threshold(system, Side::L, pair.omega_j, pair.delta_omega, pair.m_i)?,
        })
    }

    /// T* when both baths share one temperature.
    pub fn symmetric(&self) -> f64 {
        self.right.t_star.min(self.left.t_star)
    }
}

/// Sliding mean over exactly one drive period, for every sample at least one
/// period after the first. Linear interpolation closes the window.
pub fn cycle_average(times: &[f64], values: &[f64], omega_d: f64) -> Result<Vec<(f64, f64)>> {
    if times.len() != values.len() || times.len() < 2 {
        return Err(Error::Domain("cycle_average needs matching series of length >= 2".into()));
    }
    let period = 2.0 * PI / omega_d;
    let max_step = times.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("times must be strictly increasing".into()));
    }
    if max_step > period / MIN_SAMPLES_PER_PERIOD as f64 * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "series undersampled: step {max_step:.4e} exceeds period/{MIN_SAMPLES_PER_PERIOD}"
        )));
    }
    let interp = |t: f64| -> (usize, f64) {
        let k = times.partition_point(|&x| x <= t).saturating_sub(1).min(times.len() - 2);
        let f = (t - times[k]) / (times[k + 1] - times[k]);
        (k, values[k] + f * (values[k + 1] - values[k]))
    };
    let mut out = Vec::new();
    for (n, &t) in times.iter().enumerate() {
        let start = t - period;
        if start < times[0] - 1e-12 * period {
            continue;
        }
        let start = start.max(times[0]);
        let (k, v0) = interp(start);
        // trapezoid from `start` up to sample n
        let mut acc = 0.0;
        let mut prev = (start, v0);
        for m in k + 1..=n {
            acc += 0.5 * (times[m] - prev.0) * (values[m] + prev.1);
            prev = (times[m], values[m]);
        }
        out.push((t, acc / (t - start)));
    }
    Ok(out)
}

/// Local maximum of a smoothed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub x: f64,
    pub y: f64,
    /// Full width at half maximum, if both crossings lie inside the data.
    pub width: Option<f64>,
}

/// Local maxima after 3-point smoothing.
pub fn find_peaks(x: &[f64], y: &[f64]) -> Vec<Peak> {
    let n = y.len();
    if n < 3 || x.len() != n {
        return Vec::new();
    }
    let mut s = y.to_vec();
    for k in 1..n - 1 {
        s[k] = (y[k - 1] + y[k] + y[k + 1]) / 3.0;
    }
    let crossing = |k: usize, dir: isize, half: f64| -> Option<f64> {
        let mut a = k as isize;
        loop {
            let b = a + dir;
            if b < 0 || b >= n as isize {
                return None;
            }
            let (ua, ub) = (a as usize, b as usize);
            if s[ub] <= half {
                let f = (s[ua] - half) / (s[ua] - s[ub]);
                return Some(x[ua] + f * (x[ub] - x[ua]));
            }
            a = b;
        }
    };
    (1..n - 1)
        .filter(|&k| s[k] > s[k - 1] && s[k] >= s[k + 1])
        .map(|k| {
            let half = 0.5 * s[k];
            let width = match (crossing(k, -1, half), crossing(k, 1, half)) {
                (Some(l), Some(r)) => Some(r - l),
                _ => None,
            };
            Peak { index: k, x: x[k], y: s[k], width }
        })
        .collect()
}

/// E_N and the analytic rates for one pair at time t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub t: f64,
    pub e_n: f64,
    pub nu_tilde_minus: f64,
    pub gamma0: f64,
    pub gamma_n: f64,
    pub s_ij: f64,
    pub t_ent: Option<f64>,
    pub e0: f64,
}

pub fn report(engine: &CorrelatorEngine, pair: &BandPair, t: f64, mode: Mode) -> Result<EntanglementReport> {
    let neg = log_negativity(&two_mode_covariance(engine, pair, t, mode)?)?;
    let r = rate_finite_t(&engine.system, pair)?;
    Ok(EntanglementReport {
        t,
        e_n: neg.e_n,
        nu_tilde_minus: neg.nu_tilde_minus,
        gamma0: r.gamma0,
        gamma_n: r.gamma_n,
        s_ij: r.s_ij,
        t_ent: r.latency(),
        e0: r.e0,
    })
}

/// E_N averaged over the drive period ending at `t`, sampled `samples`
/// times per period.
pub fn cycle_averaged_negativity(
    engine: &CorrelatorEngine,
    pair: &BandPair,
    t: f64,
    samples: usize,
    mode: Mode,
) -> Result<f64> {
    let samples = samples.max(MIN_SAMPLES_PER_PERIOD);
    let period = engine.system.driving.period();
    if t < period {
        return Err(Error::Domain(format!("t = {t} is shorter than one drive period")));
    }
    let times: Vec<f64> = (0..=samples).map(|s| t - period + period * s as f64 / samples as f64).collect();
    let covs = engine.covariances(pair, &times, mode)?;
    let e: Vec<f64> = covs
        .iter()
        .map(|c| log_negativity(&TwoModeCovariance::from_array(c.sigma, c.t)).map(|n| n.e_n))
        .collect::<Result<_>>()?;
    let avg = cycle_average(&times, &e, engine.system.driving.omega_d)?;
    Ok(avg.last().expect("window ends at the last sample").1)
}

/// One point of the entanglement spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub omega_i: f64,
    pub omega_j: f64,
    /// Cycle-averaged E_N from the covariance.
    pub e_n: f64,
    /// max(0, −S_ij + Γ_N t).
    pub e_n_analytic: f64,
    pub rates: GrowthRates,
}

/// E_N(ω_i) for matched pairs ω_j = ω_d − ω_i at time `t`, parallel over the
/// grid. `template` supplies Δω, m_i and the temperatures.
pub fn entanglement_spectrum(
    engine: &CorrelatorEngine,
    template: &BandPair,
    omegas: &[f64],
    t: f64,
    mode: Mode,
) -> Result<Vec<SpectrumPoint>> {
    let wd = engine.system.driving.omega_d;
    omegas
        .par_iter()
        .map(|&wi| {
            let pair = BandPair { omega_i: wi, omega_j: wd - wi, allow_overlap: true, ..*template };
            let rates = rate_finite_t(&engine.system, &pair)?;
            let e_n = cycle_averaged_negativity(engine, &pair, t, MIN_SAMPLES_PER_PERIOD, mode)?;
            Ok(SpectrumPoint { omega_i: wi, omega_j: pair.omega_j, e_n, e_n_analytic: rates.predicted(t), rates })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_and_thermal_are_separable() {
        let v = log_negativity(&TwoModeCovariance::vacuum()).unwrap();
        assert_eq!(v.e_n, 0.0);
        assert!((v.nu_tilde_minus - 0.5).abs() < 1e-14);
        let th = log_negativity(&TwoModeCovariance::thermal(1.4, 3.0)).unwrap();
        assert_eq!(th.e_n, 0.0);
        assert!((th.nu_tilde_minus - 0.7).abs() < 1e-13);
    }

    #[test]
    fn squeezed_negativity_is_2r() {
        for r in [1e-6, 0.01, 0.3, 1.2] {
            let n = log_negativity(&TwoModeCovariance::squeezed(r)).unwrap();
            assert!((n.e_n - 2.0 * r).abs() < 1e-12 * (1.0 + r) + 1e-14, "r={r} e_n={}", n.e_n);
        }
    }

    #[test]
    fn tiny_squeezing_keeps_precision() {
        // the quadratic formula would lose this to cancellation
        let n = log_negativity(&TwoModeCovariance::squeezed(1e-9)).unwrap();
        assert!((n.e_n - 2e-9).abs() < 1e-14);
    }

    #[test]
    fn physicality_of_standard_states() {
        assert!(TwoModeCovariance::vacuum().physicality().abs() < 1e-14);
        assert!(TwoModeCovariance::squeezed(0.7).physicality() > -1e-12);
        let bad = TwoModeCovariance::thermal(0.5, 1.0);
        assert!(bad.physicality() < -0.2);
    }

    #[test]
    fn swap_is_an_involution() {
        let s = TwoModeCovariance::squeezed(0.2);
        assert_eq!(s.swapped().swapped().sigma, s.sigma);
        let a = log_negativity(&s).unwrap().e_n;
        let b = log_negativity(&s.swapped()).unwrap().e_n;
        assert!((a - b).abs() < 1e-13);
    }

    #[test]
    fn rates_reduce_at_zero_temperature() {
        let sys = System::reference();
        let wd = sys.driving.omega_d;
        let pair = BandPair::new(0.05, wd - 0.05, 5e-4, 0.1, 0.0, 0.0);
        let z = rate_zero_t(&sys, &pair).unwrap();
        let f = rate_finite_t(&sys, &pair).unwrap();
        assert_eq!(f.s_ij, 0.0);
        assert!((f.gamma_n - z.gamma0).abs() <= 1e-15 * z.gamma0);
        assert!(z.gamma0 > 0.0);
        let off = BandPair { omega_j: wd, ..pair };
        assert!(matches!(rate_zero_t(&sys, &off), Err(Error::Contract(_))));
        assert_eq!(rate_zero_t(&sys.with_amplitude(0.0), &pair).unwrap().gamma0, 0.0);
    }

    #[test]
    fn symmetric_point_uses_modulus() {
        let sys = System::reference();
        let w = sys.driving.omega_d / 2.0;
        let pair = BandPair::new(w, w, 5e-4, 0.1, 0.0, 0.0).with_overlap();
        let g = static_green(&sys, Complex64::new(0.0, w)).unwrap();
        let expected = pair.delta_omega * 0.25 * sys.band_density(Side::R, w) * g.norm_sqr();
        let got = rate_zero_t(&sys, &pair).unwrap().gamma0;
        assert!((got - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn ohmic_threshold_arithmetic() {
        // γ₀/ω = 1/10, Δω/ω = 1/10, m/m_i = 10 gives (2/π)(1/20) = 1/(10π)
        let mut sys = System::reference();
        sys.model.gamma0 = 0.1;
        let t = breaking_threshold(&sys, Side::R, 1.0, 0.1, 0.1).unwrap();
        assert!((t.n_star_ohmic - 0.1 / PI).abs() < 1e-16);
        let n = planck_occupation(1.0, t.t_star_ohmic).unwrap();
        assert!((n - 0.1 / PI).abs() < 1e-4);
    }

    #[test]
    fn envelope_limits() {
        assert_eq!(detuned_envelope(0.0, 7.0), 7.0);
        assert!(detuned_envelope(0.025, PI / 0.025) < 1e-12);
    }

    #[test]
    fn cycle_average_removes_modulation() {
        let wd = 3.95;
        let p = 2.0 * PI / wd;
        let times: Vec<f64> = (0..400).map(|k| k as f64 * p / 32.0).collect();
        let c: Vec<f64> = times.iter().map(|_| 2.5).collect();
        for (_, v) in cycle_average(&times, &c, wd).unwrap() {
            assert!((v - 2.5).abs() < 1e-14);
        }
        let s: Vec<f64> = times.iter().map(|t| (wd * t).cos()).collect();
        let out = cycle_average(&times, &s, wd).unwrap();
        assert!(!out.is_empty());
        assert!(out.iter().all(|(_, v)| v.abs() < 1e-3));
        let coarse: Vec<f64> = (0..40).map(|k| k as f64 * p / 8.0).collect();
        assert!(cycle_average(&coarse, &vec![0.0; 40], wd).is_err());
    }

    #[test]
    fn peaks_and_widths() {
        let x: Vec<f64> = (0..201).map(|k| k as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|&v| (-(v - 3.0f64).powi(2) / 0.5).exp() + 0.5 * (-(v - 7.0f64).powi(2) / 0.5).exp()).collect();
        let p = find_peaks(&x, &y);
        assert_eq!(p.len(), 2);
        assert!((p[0].x - 3.0).abs() < 0.051 && (p[1].x - 7.0).abs() < 0.051);
        let fwhm = 2.0 * (0.5 * 2f64.ln()).sqrt();
        assert!((p[0].width.unwrap() - fwhm).abs() < 0.05);
    }
}
