//! Physical model: Ohmic-Lorentzian environment, harmonic driving and
//! the pair of environmental bands whose entanglement is studied.
//!
//! Units: ħ = k_B = 1 and the system mass is the mass unit. Frequencies,
//! temperatures and rates share one frequency unit. Nothing in the crate
//! converts units.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Which of the two environments a band or bath mode belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    R,
    L,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::R => Side::L,
            Side::L => Side::R,
        }
    }
}

/// Ohmic spectral density with a Lorentzian cutoff,
/// I(ω) = 2 m γ₀ ω Λ² / π(ω² + Λ²), shared between the R and L baths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralModel {
    pub gamma0: f64,
    pub cutoff: f64,
    pub mass: f64,
    /// Fraction of I(ω) carried by the R bath; the L bath gets the rest.
    pub split_r: f64,
}

impl SpectralModel {
    pub fn new(gamma0: f64, cutoff: f64, split_r: f64) -> Result<Self> {
        let m = SpectralModel { gamma0, cutoff, mass: 1.0, split_r };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma0 >= 0.0) || !self.gamma0.is_finite() {
            return Err(Error::Config(format!("gamma0 must be >= 0, got {}", self.gamma0)));
        }
        if !(self.cutoff > 0.0) || !self.cutoff.is_finite() {
            return Err(Error::Config(format!("cutoff must be > 0, got {}", self.cutoff)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::Config(format!("mass must be > 0, got {}", self.mass)));
        }
        if !(0.0..=1.0).contains(&self.split_r) {
            return Err(Error::Config(format!("split_R must lie in [0,1], got {}", self.split_r)));
        }
        Ok(())
    }

    pub fn split_l(&self) -> f64 {
        1.0 - self.split_r
    }

    pub fn split(&self, side: Side) -> f64 {
        match side {
            Side::R => self.split_r,
            Side::L => self.split_l(),
        }
    }

    /// I(ω) for ω ≥ 0.
    pub fn spectral_density(&self, omega: f64) -> Result<f64> {
        if omega < 0.0 || omega.is_nan() {
            return Err(Error::Domain(format!("spectral density needs omega >= 0, got {omega}")));
        }
        Ok(self.density_unchecked(omega))
    }

    /// I_α(ω) = split_α · I(ω).
    pub fn bath_density(&self, side: Side, omega: f64) -> Result<f64> {
        Ok(self.split(side) * self.spectral_density(omega)?)
    }

    /// I(ω) extended by zero to negative frequencies.
    pub fn density_or_zero(&self, omega: f64) -> f64 {
        if omega <= 0.0 {
            0.0
        } else {
            self.density_unchecked(omega)
        }
    }

    pub(crate) fn density_unchecked(&self, omega: f64) -> f64 {
        let l2 = self.cutoff * self.cutoff;
        2.0 * self.mass * self.gamma0 * omega * l2 / (PI * (omega * omega + l2))
    }

    /// Laplace transform of the dissipation kernel, γ̃(s) = γ₀Λ/(Λ + s).
    pub fn dissipation_kernel_laplace(&self, s: Complex64) -> Result<Complex64> {
        let den = s + self.cutoff;
        if den.norm() <= 1e-14 * self.cutoff {
            return Err(Error::Pole(format!("gamma~(s) has a pole at s = -cutoff, got s = {s}")));
        }
        Ok(self.gamma0 * self.cutoff / den)
    }

    /// The dissipation kernel in time, γ(t) = γ₀Λ e^{−Λt}.
    pub fn dissipation_kernel(&self, t: f64) -> f64 {
        self.gamma0 * self.cutoff * (-self.cutoff * t).exp()
    }
}

/// Harmonic driving V_R(t) = ω_r² + V cos(ω_d t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Driving {
    pub omega_r: f64,
    pub amplitude: f64,
    pub omega_d: f64,
}

impl Driving {
    pub fn new(omega_r: f64, amplitude: f64, omega_d: f64) -> Result<Self> {
        let d = Driving { omega_r, amplitude, omega_d };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_r > 0.0) {
            return Err(Error::Config(format!("omega_r must be > 0, got {}", self.omega_r)));
        }
        if !(self.omega_d > 0.0) {
            return Err(Error::Config(format!("omega_d must be > 0, got {}", self.omega_d)));
        }
        if !self.amplitude.is_finite() {
            return Err(Error::Config("drive amplitude must be finite".into()));
        }
        Ok(())
    }

    /// Fourier coefficient V_k of V_R(t) = Σ_k V_k e^{ikω_d t}.
    pub fn fourier(&self, k: i32) -> Complex64 {
        match k {
            0 => Complex64::new(self.omega_r * self.omega_r, 0.0),
            1 | -1 => Complex64::new(0.5 * self.amplitude, 0.0),
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Largest |k| with V_k ≠ 0 apart from k = 0.
    pub fn harmonics(&self) -> i32 {
        1
    }

    pub fn potential(&self, t: f64) -> f64 {
        self.omega_r * self.omega_r + self.amplitude * (self.omega_d * t).cos()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega_d
    }

    /// Detuning δ = ω_r − ω_d of the drive below the oscillator frequency.
    pub fn detuning(&self) -> f64 {
        self.omega_r - self.omega_d
    }
}

/// Bose-Einstein occupation 1/(e^{ω/T} − 1); exactly zero at T = 0.
pub fn planck_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("occupation needs omega > 0, got {omega}")));
    }
    if temperature < 0.0 || temperature.is_nan() {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Two environmental bands: ω_i in the R bath and ω_j in the L bath.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPair {
    pub omega_i: f64,
    pub omega_j: f64,
    pub delta_omega: f64,
    pub m_i: f64,
    pub t_r: f64,
    pub t_l: f64,
    /// Permit |ω_i − ω_j| ≤ Δω (the bands still live in different baths).
    pub allow_overlap: bool,
}

impl BandPair {
    pub fn new(omega_i: f64, omega_j: f64, delta_omega: f64, m_i: f64, t_r: f64, t_l: f64) -> Self {
        BandPair { omega_i, omega_j, delta_omega, m_i, t_r, t_l, allow_overlap: false }
    }

    pub fn with_overlap(mut self) -> Self {
        self.allow_overlap = true;
        self
    }

    /// Hard checks. Returns soft warnings (narrow-band ratio) on success.
    pub fn validate(&self, max_ratio: f64) -> Result<Vec<String>> {
        if !(self.omega_i > 0.0 && self.omega_j > 0.0) {
            return Err(Error::Domain(format!(
                "band frequencies must be > 0, got ({}, {})",
                self.omega_i, self.omega_j
            )));
        }
        if !(self.delta_omega > 0.0) {
            return Err(Error::Domain(format!("delta_omega must be > 0, got {}", self.delta_omega)));
        }
        if !(self.m_i > 0.0) {
            return Err(Error::Domain(format!("band mass must be > 0, got {}", self.m_i)));
        }
        if self.t_r < 0.0 || self.t_l < 0.0 {
            return Err(Error::Domain("temperatures must be >= 0".into()));
        }
        if !self.allow_overlap && (self.omega_i - self.omega_j).abs() <= self.delta_omega {
            return Err(Error::Contract(format!(
                "bands at {} and {} overlap within delta_omega = {}",
                self.omega_i, self.omega_j, self.delta_omega
            )));
        }
        let mut warnings = Vec::new();
        for w in [self.omega_i, self.omega_j] {
            if self.delta_omega / w >= max_ratio {
                warnings.push(format!(
                    "delta_omega/omega = {:.3} at omega = {w} is not small (limit {max_ratio})",
                    self.delta_omega / w
                ));
            }
        }
        Ok(warnings)
    }

    pub fn occupation(&self, side: Side) -> Result<f64> {
        match side {
            Side::R => planck_occupation(self.omega_i, self.t_r),
            Side::L => planck_occupation(self.omega_j, self.t_l),
        }
    }

    /// ν_{α} = 2n_α + 1 for the band on `side`.
    pub fn nu(&self, side: Side) -> Result<f64> {
        Ok(2.0 * self.occupation(side)? + 1.0)
    }

    pub fn temperature(&self, side: Side) -> f64 {
        match side {
            Side::R => self.t_r,
            Side::L => self.t_l,
        }
    }

    pub fn frequency(&self, side: Side) -> f64 {
        match side {
            Side::R => self.omega_i,
            Side::L => self.omega_j,
        }
    }

    /// Exchange the roles of the two bands together with R ↔ L.
    pub fn swapped(&self) -> BandPair {
        BandPair {
            omega_i: self.omega_j,
            omega_j: self.omega_i,
            t_r: self.t_l,
            t_l: self.t_r,
            ..*self
        }
    }
}

/// Model and driving bundled: everything the Green function depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct System {
    pub model: SpectralModel,
    pub driving: Driving,
}

impl System {
    /// Parameters of the energy and entanglement figures in units where
    /// γ₀ = 0.005: ω_r = 800γ₀, δ = 10γ₀, V = ω_r²/32, Λ = 20ω_r.
    pub fn reference() -> System {
        let gamma0 = 0.005;
        let omega_r = 800.0 * gamma0;
        let delta = 10.0 * gamma0;
        System {
            model: SpectralModel { gamma0, cutoff: 20.0 * omega_r, mass: 1.0, split_r: 0.5 },
            driving: Driving { omega_r, amplitude: omega_r * omega_r / 32.0, omega_d: omega_r - delta },
        }
    }

    pub fn with_amplitude(mut self, v: f64) -> System {
        self.driving.amplitude = v;
        self
    }

    /// I_α(ω), zero for ω ≤ 0.
    pub fn band_density(&self, side: Side, omega: f64) -> f64 {
        self.model.split(side) * self.model.density_or_zero(omega)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> SpectralModel {
        SpectralModel::new(0.005, 80.0, 0.5).unwrap()
    }

    #[test]
    fn density_closed_form_values() {
        let m = model();
        assert_eq!(m.spectral_density(0.0).unwrap(), 0.0);
        let at_cutoff = m.spectral_density(80.0).unwrap();
        assert!((at_cutoff - 0.005 * 80.0 / PI).abs() < 1e-15);
        // 2·0.005·4·6400/(π·6416)
        let v = m.spectral_density(4.0).unwrap();
        assert!((v - 0.012_700_643_837_757_234).abs() < 1e-15, "{v}");
        assert!(m.spectral_density(-1.0).is_err());
    }

    #[test]
    fn splits_add_up() {
        let m = SpectralModel::new(0.005, 80.0, 0.3).unwrap();
        for w in [1e-3, 0.1, 3.9, 40.0] {
            let sum = m.bath_density(Side::R, w).unwrap() + m.bath_density(Side::L, w).unwrap();
            assert!((sum - m.spectral_density(w).unwrap()).abs() <= 1e-16 * sum.max(1e-300) * 4.0);
        }
    }

    #[test]
    fn kernel_laplace_values() {
        let m = model();
        let g0 = m.dissipation_kernel_laplace(Complex64::new(0.0, 0.0)).unwrap();
        assert!((g0 - Complex64::new(0.005, 0.0)).norm() < 1e-16);
        let gi = m.dissipation_kernel_laplace(Complex64::new(0.0, 80.0)).unwrap();
        assert!((gi - Complex64::new(0.0025, -0.0025)).norm() < 1e-16);
        let far = m.dissipation_kernel_laplace(Complex64::new(1e12, 0.0)).unwrap();
        assert!(far.norm() < 1e-9);
        assert!(m.dissipation_kernel_laplace(Complex64::new(-80.0, 0.0)).is_err());
    }

    #[test]
    fn occupation_values() {
        assert_eq!(planck_occupation(1.0, 0.0).unwrap(), 0.0);
        let n = planck_occupation(0.7, 0.7).unwrap();
        assert!((n - 0.581_976_706_869_326_4).abs() < 1e-15);
        let n = planck_occupation(1e-3, 1.0).unwrap();
        assert!((n - 1000.0).abs() / 1000.0 < 1e-3);
        assert!(planck_occupation(0.0, 1.0).is_err());
    }

    #[test]
    fn driving_fourier_is_real_harmonic() {
        let d = Driving::new(4.0, 0.5, 3.95).unwrap();
        assert_eq!(d.fourier(1), d.fourier(-1).conj());
        assert_eq!(d.fourier(0).re, 16.0);
        assert_eq!(d.fourier(2).norm(), 0.0);
        let t = 0.37;
        let series: f64 = (-2..=2)
            .map(|k| (d.fourier(k) * Complex64::from_polar(1.0, k as f64 * d.omega_d * t)).re)
            .sum();
        assert!((series - d.potential(t)).abs() < 1e-13);
    }

    #[test]
    fn band_checks() {
        let p = BandPair::new(1.0, 1.0002, 5e-4, 0.1, 0.0, 0.0);
        assert!(p.validate(0.1).is_err());
        assert!(p.with_overlap().validate(0.1).is_ok());
        let p = BandPair::new(0.05, 3.9, 0.01, 0.1, 0.0, 0.0);
        assert_eq!(p.validate(0.1).unwrap().len(), 1);
    }
}
