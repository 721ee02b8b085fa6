//! Equal-time correlators of two environmental bands, their energies and the
//! heat current into a band.
//!
//! A band of width Δω centred at ω_b is one oscillator with coupling
//! λ_b² = m_b ω_b I_α(ω_b) Δω. Working with the dimensionless quadratures
//! X = √(m_b ω_b) q and P = p/√(m_b ω_b), the band mass drops out and
//!
//! X_b(t) = X_b^h(t) + √(I_bΔω) ∫₀ᵗ sin ω_b(t−τ) x(τ) dτ,
//! P_b(t) = P_b^h(t) + √(I_bΔω) ∫₀ᵗ cos ω_b(t−τ) x(τ) dτ,
//!
//! with x = x_h + G ∗ ξ/m. Every bath mode enters through the kernel
//!
//! W(ν, σ; t) = ∫₀ᵗ e^{iν(t−τ)} ∫₀^τ G(τ, t′) e^{iσt′} dt′ dτ,
//!
//! which has a closed form in terms of the Floquet poles. The continuum
//! part is a frequency integral over I(ω)(2n(ω)+1); the explicit band
//! operators add the free evolution and its cross terms with the feedback.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::floquet::FloquetPoles;
use crate::model::{planck_occupation, BandPair, Side, System};
use crate::quad::{integrate, QuadOptions};
use crate::special::phase_integral;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Default Floquet truncation for time-domain work.
pub const DEFAULT_K_MAX: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Full finite-time expression including the initial system state.
    Exact,
    /// Vacuum part plus the terms growing linearly in t.
    Longtime,
}

/// Quadrature and range settings for the continuum integral.
#[derive(Debug, Clone, Copy)]
pub struct ContinuumSettings {
    pub quad: QuadOptions,
    /// Integrate up to this multiple of the cutoff.
    pub top_factor: f64,
    /// Breakpoints at peak ± (π/t)·{0..rings}.
    pub rings: usize,
    /// Number of times integrated together.
    pub chunk: usize,
}

impl Default for ContinuumSettings {
    fn default() -> Self {
        ContinuumSettings {
            quad: QuadOptions { rel_tol: 1e-6, abs_tol: 1e-15, max_panels: 400_000 },
            top_factor: 10.0,
            rings: 8,
            chunk: 24,
        }
    }
}

/// Symmetrized equal-time correlators of the band pair at time `t`.
///
/// `sigma` is the dimensionless covariance in the order (X_i, P_i, X_j, P_j);
/// the named fields carry physical units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandCorrelators {
    pub pair: BandPair,
    pub t: f64,
    pub mode: Mode,
    pub sigma: [[f64; 4]; 4],
    pub qq_ii: f64,
    pub qq_jj: f64,
    pub qq_ij: f64,
    pub pp_ii: f64,
    pub pp_jj: f64,
    pub pp_ij: f64,
    pub qp_ii: f64,
    pub qp_jj: f64,
    /// ⟨{q_i, p_j}⟩/2
    pub qp_ij: f64,
    /// ⟨{p_i, q_j}⟩/2
    pub pq_ij: f64,
    pub warnings: Vec<String>,
}

impl BandCorrelators {
    fn from_sigma(pair: BandPair, t: f64, mode: Mode, sigma: [[f64; 4]; 4], warnings: Vec<String>) -> Self {
        let si = (pair.m_i * pair.omega_i).sqrt();
        let sj = (pair.m_i * pair.omega_j).sqrt();
        BandCorrelators {
            pair,
            t,
            mode,
            sigma,
            qq_ii: sigma[0][0] / (si * si),
            qq_jj: sigma[2][2] / (sj * sj),
            qq_ij: sigma[0][2] / (si * sj),
            pp_ii: sigma[1][1] * si * si,
            pp_jj: sigma[3][3] * sj * sj,
            pp_ij: sigma[1][3] * si * sj,
            qp_ii: sigma[0][1],
            qp_jj: sigma[2][3],
            qp_ij: sigma[0][3] * sj / si,
            pq_ij: sigma[1][2] * si / sj,
            warnings,
        }
    }

    /// E_b = ω_b (⟨X²⟩ + ⟨P²⟩)/2.
    pub fn energy(&self, side: Side) -> f64 {
        let (w, o) = match side {
            Side::R => (self.pair.omega_i, 0),
            Side::L => (self.pair.omega_j, 2),
        };
        0.5 * w * (self.sigma[o][o] + self.sigma[o + 1][o + 1])
    }
}

/// 𝒥(ω, ω_i, t) with its resonant and finite parts per Floquet index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JFunctionValue {
    pub omega: f64,
    pub omega_i: f64,
    pub t: f64,
    pub value: Complex64,
    /// (k, t·sinc(Δ_k t/2) e^{iΔ_k t/2} a_k(iω; t), F_k).
    pub terms: Vec<(i32, Complex64, Complex64)>,
}

/// Heat current into one band, split into the two sectors of the rate
/// equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatRate {
    pub total: f64,
    /// Partners at ω_b − kω_d > 0 (resonant exchange).
    pub transport: f64,
    /// Partners with ω_b − kω_d < 0 (pair creation, always heating).
    pub pair_creation: f64,
}

/// Leading-order heat current into band i at T = 0 for matched bands, with
/// the partner density taken as the full I(ω_j) and as I_L(ω_j) only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormHeat {
    pub total_density: f64,
    pub left_density: f64,
}

/// Finite-time correlator machinery built on the Floquet poles.
#[derive(Debug, Clone)]
pub struct CorrelatorEngine {
    pub system: System,
    pub poles: FloquetPoles,
    pub settings: ContinuumSettings,
}

struct Band {
    omega: f64,
    pref: f64,
    nu: f64,
}

/// Per-time data independent of the integration frequency.
struct TimeData {
    t: f64,
    /// e^{iνt} for ν = ±ω_i, ±ω_j.
    enu: [Complex64; 4],
    /// e^{i(kω_d − ν)t}, [ν][k].
    phase: Vec<Vec<Complex64>>,
    /// β_n(ν, t), [ν][n].
    beta: Vec<Vec<Complex64>>,
}

impl CorrelatorEngine {
    pub fn new(system: System) -> Result<Self> {
        Self::with_truncation(system, DEFAULT_K_MAX)
    }

    pub fn with_truncation(system: System, k_max: usize) -> Result<Self> {
        system.model.validate()?;
        system.driving.validate()?;
        let poles = FloquetPoles::new(&system, k_max)?;
        Ok(CorrelatorEngine { system, poles, settings: ContinuumSettings::default() })
    }

    pub fn with_settings(mut self, settings: ContinuumSettings) -> Self {
        self.settings = settings;
        self
    }

    fn k_range(&self) -> std::ops::RangeInclusive<i32> {
        let kk = self.poles.k_max as i32;
        -kk..=kk
    }

    fn omega_d(&self) -> f64 {
        self.system.driving.omega_d
    }

    /// β_n(ν, t) = Σ_k r_kn E(p_n + i(kω_d − ν), t) for the given residues.
    fn beta(&self, residues: &[Vec<Complex64>], nu: f64, t: f64) -> Vec<Complex64> {
        let wd = self.omega_d();
        let mut out = vec![Complex64::new(0.0, 0.0); self.poles.poles.len()];
        for (ki, k) in self.k_range().enumerate() {
            for (n, p) in self.poles.poles.iter().enumerate() {
                out[n] += residues[ki][n] * phase_integral(p + I * (k as f64 * wd - nu), t);
            }
        }
        out
    }

    /// W(ν, σ; t), evaluated directly.
    pub fn w_kernel(&self, nu: f64, sigma: f64, t: f64) -> Complex64 {
        let wd = self.omega_d();
        let s = I * sigma;
        let beta = self.beta(&self.poles.green_residues, nu, t);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in self.k_range() {
            let a = self.poles.a_laplace(k, s);
            acc += a * phase_integral(I * (k as f64 * wd - nu + sigma), t);
        }
        for (b, p) in beta.iter().zip(&self.poles.poles) {
            acc -= b / (s - p);
        }
        Complex64::from_polar(1.0, nu * t) * acc
    }

    /// ∫₀ᵗ e^{iν(t−τ)} Y(τ) dτ for the homogeneous responses Y = G(·, 0)
    /// (`displacement = false`) or the displacement response D.
    pub fn homogeneous_kernel(&self, nu: f64, t: f64, displacement: bool) -> Complex64 {
        let r = if displacement { &self.poles.displacement_residues } else { &self.poles.green_residues };
        let beta = self.beta(r, nu, t);
        Complex64::from_polar(1.0, nu * t) * beta.iter().sum::<Complex64>()
    }

    /// 𝒥(ω, ω_i, t) = Σ_k ∫₀ᵗ dt′ e^{i(ω−ω_i+kω_d)t′} a_k(iω; t′).
    ///
    /// Each term splits exactly into E(iΔ_k, t) a_k(iω; t) and
    /// F_k = [a_k(iω; t) − a_k(i(ω_i − kω_d); t)]/(iΔ_k); the removable point
    /// Δ_k → 0 is evaluated from the Taylor expansion of a_k.
    pub fn j_function(&self, omega: f64, omega_i: f64, t: f64) -> Result<JFunctionValue> {
        if t < 0.0 {
            return Err(Error::Domain(format!("j_function needs t >= 0, got {t}")));
        }
        let wd = self.omega_d();
        let slowest = self.poles.poles.iter().map(|p| -p.re).fold(f64::INFINITY, f64::min);
        let scale = t.max(1.0 / slowest);
        let mut terms = Vec::new();
        let mut value = Complex64::new(0.0, 0.0);
        for k in self.k_range() {
            let d = omega - omega_i + k as f64 * wd;
            let a = self.poles.a_finite(k, omega, t);
            let resonant = phase_integral(I * d, t) * a;
            let finite = if (d * scale).abs() < 1e-4 {
                let (d1, d2) = self.a_finite_derivatives(k, omega, t);
                // (a(ω) − a(ω − Δ))/(iΔ) = −i(a′ − Δ a″/2) + O(Δ²)
                -I * (d1 - 0.5 * d * d2)
            } else {
                (a - self.poles.a_finite(k, omega_i - k as f64 * wd, t)) / (I * d)
            };
            value += resonant + finite;
            terms.push((k, resonant, finite));
        }
        Ok(JFunctionValue { omega, omega_i, t, value, terms })
    }

    /// First and second ω-derivatives of a_k(iω; t).
    fn a_finite_derivatives(&self, k: i32, omega: f64, t: f64) -> (Complex64, Complex64) {
        let kk = self.poles.k_max as i32;
        if k.abs() > kk {
            return (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        }
        let row = &self.poles.green_residues[(k + kk) as usize];
        let mut d1 = Complex64::new(0.0, 0.0);
        let mut d2 = Complex64::new(0.0, 0.0);
        for (r, p) in row.iter().zip(&self.poles.poles) {
            let z = p - I * omega;
            let ezt = (z * t).exp();
            let m0 = phase_integral(z, t);
            let m1 = (t * ezt - m0) / z;
            let m2 = (t * t * ezt - 2.0 * m1) / z;
            d1 += r * (-I) * m1;
            d2 -= r * m2;
        }
        (d1, d2)
    }

    fn bands(&self, pair: &BandPair) -> Result<[Band; 2]> {
        let m = self.system.model.mass;
        let dw = pair.delta_omega;
        let b = |side: Side| -> Result<Band> {
            let w = pair.frequency(side);
            Ok(Band { omega: w, pref: (self.system.band_density(side, w) * dw).sqrt() / m, nu: pair.nu(side)? })
        };
        Ok([b(Side::R)?, b(Side::L)?])
    }

    fn time_data(&self, pair: &BandPair, t: f64) -> TimeData {
        let wd = self.omega_d();
        let nus = [pair.omega_i, -pair.omega_i, pair.omega_j, -pair.omega_j];
        let enu = nus.map(|nu| Complex64::from_polar(1.0, nu * t));
        let phase = nus
            .iter()
            .map(|&nu| self.k_range().map(|k| Complex64::from_polar(1.0, (k as f64 * wd - nu) * t)).collect())
            .collect();
        let beta = nus.iter().map(|&nu| self.beta(&self.poles.green_residues, nu, t)).collect();
        TimeData { t, enu, phase, beta }
    }

    fn check(&self, pair: &BandPair, times: &[f64], mode: Mode) -> Result<Vec<String>> {
        let mut warnings = pair.validate(0.1)?;
        if times.iter().any(|&t| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::Domain("times must be finite and >= 0".into()));
        }
        if mode == Mode::Longtime {
            let g0 = self.system.model.gamma0;
            if times.iter().any(|&t| t * g0 < 5.0) {
                warnings.push("longtime mode used at t < 5/gamma0".into());
            }
        }
        let t_rec = 2.0 * PI / pair.delta_omega;
        if times.iter().any(|&t| t > 0.5 * t_rec) {
            warnings.push(format!("t exceeds half the band recurrence time 2pi/delta_omega = {t_rec:.4e}"));
        }
        Ok(warnings)
    }

    /// Correlators of the band pair at each time.
    pub fn covariances(&self, pair: &BandPair, times: &[f64], mode: Mode) -> Result<Vec<BandCorrelators>> {
        let warnings = self.check(pair, times, mode)?;
        let sigmas: Vec<[[f64; 4]; 4]> = match mode {
            Mode::Exact => {
                let chunks: Vec<&[f64]> = times.chunks(self.settings.chunk.max(1)).collect();
                let parts: Result<Vec<Vec<[[f64; 4]; 4]>>> =
                    chunks.par_iter().map(|c| self.exact_chunk(pair, c)).collect();
                parts?.into_iter().flatten().collect()
            }
            Mode::Longtime => times.iter().map(|&t| self.longtime_sigma(pair, t)).collect::<Result<_>>()?,
        };
        Ok(times
            .iter()
            .zip(sigmas)
            .map(|(&t, s)| BandCorrelators::from_sigma(*pair, t, mode, s, warnings.clone()))
            .collect())
    }

    pub fn covariance(&self, pair: &BandPair, t: f64, mode: Mode) -> Result<BandCorrelators> {
        Ok(self.covariances(pair, &[t], mode)?.remove(0))
    }

    /// Position block only (same computation as [`Self::covariance`]).
    pub fn position_correlator(&self, pair: &BandPair, t: f64, mode: Mode) -> Result<BandCorrelators> {
        self.covariance(pair, t, mode)
    }

    /// Momentum and cross blocks (same computation as [`Self::covariance`]).
    pub fn momentum_and_cross_correlators(&self, pair: &BandPair, t: f64, mode: Mode) -> Result<BandCorrelators> {
        self.covariance(pair, t, mode)
    }

    /// E_b(t) for the band on `side`.
    pub fn band_energy(&self, pair: &BandPair, side: Side, times: &[f64], mode: Mode) -> Result<Vec<f64>> {
        Ok(self.covariances(pair, times, mode)?.iter().map(|c| c.energy(side)).collect())
    }

    fn breakpoints(&self, pair: &BandPair, t: f64, top: f64) -> Vec<f64> {
        let wd = self.omega_d();
        let mut bp = Vec::new();
        let width = if t > 0.0 { PI / t } else { 0.0 };
        for nu in [pair.omega_i, -pair.omega_i, pair.omega_j, -pair.omega_j] {
            for k in self.k_range() {
                let c = k as f64 * wd - nu;
                if c <= 0.0 {
                    continue;
                }
                bp.push(c);
                if width > 0.0 {
                    for r in 1..=self.settings.rings {
                        bp.push(c - r as f64 * width);
                        bp.push(c + r as f64 * width);
                    }
                }
            }
        }
        for p in &self.poles.poles {
            let c = -p.im;
            let hw = -p.re;
            if c > 0.0 && hw < 0.5 * c {
                bp.push(c);
                for f in [1.0, 4.0, 16.0] {
                    bp.push(c - f * hw);
                    bp.push(c + f * hw);
                }
            }
        }
        let mut x = top;
        while x > 1e-4 {
            x *= 0.5;
            bp.push(x);
        }
        bp.retain(|&x| x > 0.0 && x < top);
        bp
    }

    fn exact_chunk(&self, pair: &BandPair, times: &[f64]) -> Result<Vec<[[f64; 4]; 4]>> {
        let bands = self.bands(pair)?;
        let data: Vec<TimeData> = times.iter().map(|&t| self.time_data(pair, t)).collect();
        let tmax = times.iter().copied().fold(0.0, f64::max);
        let top = self.settings.top_factor * self.system.model.cutoff;
        let mut bp = self.breakpoints(pair, tmax, top);
        let tmin = times.iter().copied().fold(f64::INFINITY, f64::min);
        if tmin > 0.0 && tmin < 0.5 * tmax {
            bp.extend(self.breakpoints(pair, tmin, top));
        }
        let dim = 10 * times.len();
        let model = self.system.model;
        let (t_r, t_l) = (pair.t_r, pair.t_l);
        let poles = &self.poles;
        let wd = self.omega_d();
        let nk = 2 * poles.k_max + 1;
        let np = poles.poles.len();
        let mut inv = vec![Complex64::new(0.0, 0.0); np];
        let mut a = vec![Complex64::new(0.0, 0.0); nk];
        let integrand = |w: f64, out: &mut [f64]| {
            let weight = {
                let i_tot = model.density_or_zero(w);
                let nr = planck_occupation(w, t_r).unwrap_or(0.0);
                let nl = planck_occupation(w, t_l).unwrap_or(0.0);
                0.5 * i_tot * (model.split_r * (2.0 * nr + 1.0) + model.split_l() * (2.0 * nl + 1.0))
            };
            let s = Complex64::new(0.0, -w);
            for (n, p) in poles.poles.iter().enumerate() {
                inv[n] = 1.0 / (s - p);
            }
            for (ki, ak) in a.iter_mut().enumerate() {
                *ak = poles.green_residues[ki].iter().zip(&inv).map(|(r, v)| r * v).sum();
            }
            for (ti, td) in data.iter().enumerate() {
                let ew = Complex64::from_polar(1.0, -w * td.t);
                let mut wv = [Complex64::new(0.0, 0.0); 4];
                let nus = [bands[0].omega, -bands[0].omega, bands[1].omega, -bands[1].omega];
                for (vi, &nu) in nus.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (ki, k) in (-(poles.k_max as i32)..=poles.k_max as i32).enumerate() {
                        let d = k as f64 * wd - nu - w;
                        let e = if (d * td.t).abs() < 1e-4 {
                            phase_integral(Complex64::new(0.0, d), td.t)
                        } else {
                            (td.phase[vi][ki] * ew - 1.0) / Complex64::new(0.0, d)
                        };
                        acc += a[ki] * e;
                    }
                    for n in 0..np {
                        acc -= td.beta[vi][n] * inv[n];
                    }
                    wv[vi] = td.enu[vi] * acc;
                }
                let ker = kernels(&wv, &bands);
                fill_products(&ker, weight, &mut out[10 * ti..10 * ti + 10]);
            }
        };
        let res = integrate(integrand, 0.0, top, &bp, dim, self.settings.quad)?;

        let mut out = Vec::with_capacity(times.len());
        for (ti, &t) in times.iter().enumerate() {
            let mut sigma = unpack(&res.value[10 * ti..10 * ti + 10]);
            self.add_band_terms(pair, &bands, t, &mut sigma, Mode::Exact);
            self.add_initial_system(&bands, t, &mut sigma);
            out.push(sigma);
        }
        Ok(out)
    }

    /// Free evolution of the band operators and its cross terms with the
    /// feedback through the system.
    fn add_band_terms(&self, _pair: &BandPair, bands: &[Band; 2], t: f64, sigma: &mut [[f64; 4]; 4], mode: Mode) {
        for b in 0..2 {
            let o = 2 * b;
            sigma[o][o] += 0.5 * bands[b].nu;
            sigma[o + 1][o + 1] += 0.5 * bands[b].nu;
        }
        for (b, band) in bands.iter().enumerate() {
            let sigma_b = -band.omega;
            let coupling = (0.5 * band.pref * band.pref).sqrt() * self.system.model.mass;
            let wv: Vec<Complex64> = [bands[0].omega, -bands[0].omega, bands[1].omega, -bands[1].omega]
                .iter()
                .map(|&nu| match mode {
                    Mode::Exact => self.w_kernel(nu, sigma_b, t),
                    Mode::Longtime => self.w_extensive(nu, sigma_b, t),
                })
                .collect();
            let ker = kernels(&[wv[0], wv[1], wv[2], wv[3]], bands).map(|k| k * coupling);
            let phase = Complex64::from_polar(1.0 / 2f64.sqrt(), -band.omega * t);
            let mut free = [Complex64::new(0.0, 0.0); 4];
            free[2 * b] = phase;
            free[2 * b + 1] = -I * phase;
            for u in 0..4 {
                for v in 0..4 {
                    sigma[u][v] += band.nu * (free[u] * ker[v].conj() + ker[u] * free[v].conj()).re;
                }
            }
        }
    }

    /// Resonant part of W at Δ_k = 0 exactly, E → t.
    fn w_extensive(&self, nu: f64, sigma: f64, t: f64) -> Complex64 {
        let wd = self.omega_d();
        let tol = 1e-9 * wd;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in self.k_range() {
            if (k as f64 * wd - nu + sigma).abs() < tol {
                acc += self.poles.a_laplace(k, I * sigma) * t;
            }
        }
        Complex64::from_polar(1.0, nu * t) * acc
    }

    /// Contribution of the initial system state (ground state of ω_r).
    fn add_initial_system(&self, bands: &[Band; 2], t: f64, sigma: &mut [[f64; 4]; 4]) {
        let m = self.system.model.mass;
        let wr = self.system.driving.omega_r;
        let x2 = 1.0 / (2.0 * m * wr);
        let p2 = m * wr / 2.0;
        for (disp, var, scale) in [(true, x2, 1.0), (false, p2, 1.0 / m)] {
            let wv = [bands[0].omega, -bands[0].omega, bands[1].omega, -bands[1].omega]
                .map(|nu| self.homogeneous_kernel(nu, t, disp));
            // pref carries 1/m for the noise path; undo it here
            let ker = kernels(&wv, bands).map(|k| (k * m * scale).re);
            for u in 0..4 {
                for v in 0..4 {
                    sigma[u][v] += var * ker[u] * ker[v];
                }
            }
        }
    }

    fn longtime_sigma(&self, pair: &BandPair, t: f64) -> Result<[[f64; 4]; 4]> {
        let bands = self.bands(pair)?;
        let wd = self.omega_d();
        let model = self.system.model;
        let nus = [bands[0].omega, -bands[0].omega, bands[1].omega, -bands[1].omega];
        // kernel coefficients c[u][ν] with K_u = pref_u Σ_ν c W(ν)
        let coef = kernel_coefficients(&bands);
        let mut sigma = [[0.0; 4]; 4];
        let tol = 1e-9 * wd;
        for (v1, &nu1) in nus.iter().enumerate() {
            for k1 in self.k_range() {
                let w1 = k1 as f64 * wd - nu1;
                if w1 <= tol {
                    continue;
                }
                for (v2, &nu2) in nus.iter().enumerate() {
                    for k2 in self.k_range() {
                        let w2 = k2 as f64 * wd - nu2;
                        if (w1 - w2).abs() > tol {
                            continue;
                        }
                        let s = Complex64::new(0.0, -w1);
                        let nr = planck_occupation(w1, pair.t_r)?;
                        let nl = planck_occupation(w1, pair.t_l)?;
                        let weight = 0.5
                            * model.density_or_zero(w1)
                            * (model.split_r * (2.0 * nr + 1.0) + model.split_l() * (2.0 * nl + 1.0));
                        let amp = self.poles.a_laplace(k1, s)
                            * self.poles.a_laplace(k2, s).conj()
                            * Complex64::from_polar(1.0, (nu1 - nu2) * t);
                        let val = 2.0 * PI * t * weight * amp;
                        for u in 0..4 {
                            for v in 0..4 {
                                let c = coef[u][v1] * coef[v][v2].conj();
                                sigma[u][v] += (c * val).re;
                            }
                        }
                    }
                }
            }
        }
        self.add_band_terms(pair, &bands, t, &mut sigma, Mode::Longtime);
        Ok(sigma)
    }

    /// Q̇ for the band on `side` from the rate equation with partners at
    /// ω_b − kω_d in either bath.
    pub fn heat_rate(&self, pair: &BandPair, side: Side) -> Result<HeatRate> {
        let model = self.system.model;
        let m = model.mass;
        let wd = self.omega_d();
        let w = pair.frequency(side);
        let n_own = planck_occupation(w, pair.temperature(side))?;
        let i_own = self.system.band_density(side, w);
        let mut transport = 0.0;
        let mut pair_creation = 0.0;
        for k in self.k_range() {
            let wk = w - k as f64 * wd;
            if wk == 0.0 {
                continue;
            }
            let amp = self.poles.a_laplace(k, Complex64::new(0.0, wk)).norm_sqr();
            for partner in [Side::R, Side::L] {
                let temp = pair.temperature(partner);
                let i_p = self.system.band_density(partner, wk.abs());
                let p = PI * i_own * i_p * amp / (2.0 * m * m);
                let n_p = planck_occupation(wk.abs(), temp)?;
                if wk > 0.0 {
                    transport += w * p * (n_p - n_own);
                } else {
                    pair_creation += w * p * (n_p + n_own + 1.0);
                }
            }
        }
        let dw = pair.delta_omega;
        Ok(HeatRate { total: dw * (transport + pair_creation), transport: dw * transport, pair_creation: dw * pair_creation })
    }

    /// π ω_i Δω |V₁|² I_R(ω_i) I(ω_j) |g̃_i g̃_j*|² / 2m² for ω_j = ω_d − ω_i,
    /// with V₁ the first Fourier coefficient of the drive.
    pub fn heat_rate_closed_form(&self, pair: &BandPair) -> Result<ClosedFormHeat> {
        let sys = &self.system;
        let m = sys.model.mass;
        let v1 = sys.driving.fourier(1).norm();
        let gi = crate::floquet::static_green(sys, Complex64::new(0.0, pair.omega_i))?;
        let gj = crate::floquet::static_green(sys, Complex64::new(0.0, pair.omega_j))?;
        let base = PI * pair.omega_i * pair.delta_omega * v1 * v1 * sys.band_density(Side::R, pair.omega_i)
            * (gi * gj.conj()).norm_sqr()
            / (2.0 * m * m);
        Ok(ClosedFormHeat {
            total_density: base * sys.model.density_or_zero(pair.omega_j),
            left_density: base * sys.band_density(Side::L, pair.omega_j),
        })
    }
}

/// c[u][ν] such that kernel u is pref_u Σ_ν c[u][ν] W(ν), ν ordered
/// (ω_i, −ω_i, ω_j, −ω_j).
fn kernel_coefficients(bands: &[Band; 2]) -> [[Complex64; 4]; 4] {
    let z = Complex64::new(0.0, 0.0);
    let s = -0.5 * I; // 1/(2i)
    let h = Complex64::new(0.5, 0.0);
    let mut c = [[z; 4]; 4];
    for b in 0..2 {
        let p = bands[b].pref;
        c[2 * b][2 * b] = s * p;
        c[2 * b][2 * b + 1] = -s * p;
        c[2 * b + 1][2 * b] = h * p;
        c[2 * b + 1][2 * b + 1] = h * p;
    }
    c
}

/// Sine kernels for X_b and cosine kernels for P_b, scaled by pref_b.
fn kernels(wv: &[Complex64; 4], bands: &[Band; 2]) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for b in 0..2 {
        let (wp, wm) = (wv[2 * b], wv[2 * b + 1]);
        out[2 * b] = (wp - wm) / (2.0 * I) * bands[b].pref;
        out[2 * b + 1] = 0.5 * (wp + wm) * bands[b].pref;
    }
    out
}

const PAIRS: [(usize, usize); 10] = [(0, 0), (0, 1), (1, 1), (2, 2), (2, 3), (3, 3), (0, 2), (0, 3), (1, 2), (1, 3)];

fn fill_products(ker: &[Complex64; 4], weight: f64, out: &mut [f64]) {
    for (e, &(u, v)) in PAIRS.iter().enumerate() {
        out[e] = weight * (ker[u] * ker[v].conj()).re;
    }
}

fn unpack(v: &[f64]) -> [[f64; 4]; 4] {
    let mut s = [[0.0; 4]; 4];
    for (e, &(u, w)) in PAIRS.iter().enumerate() {
        s[u][w] = v[e];
        s[w][u] = v[e];
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn engine() -> CorrelatorEngine {
        CorrelatorEngine::new(System::reference()).unwrap()
    }

    /// Trapezoid-in-time reference for W via cumulative integrals of G.
    fn w_by_time_quadrature(e: &CorrelatorEngine, nu: f64, sigma: f64, t: f64, n: usize) -> Complex64 {
        // h_σ(τ) = Σ_k e^{i(kω_d+σ)τ} a_k(iσ; τ); a_k uses its closed form
        let wd = e.omega_d();
        let h = |tau: f64| -> Complex64 {
            e.k_range()
                .map(|k| Complex64::from_polar(1.0, (k as f64 * wd + sigma) * tau) * e.poles.a_finite(k, sigma, tau))
                .sum()
        };
        let dt = t / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..=n {
            let tau = i as f64 * dt;
            let wgt = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += wgt * Complex64::from_polar(1.0, nu * (t - tau)) * h(tau);
        }
        acc * dt / 3.0
    }

    #[test]
    fn w_kernel_matches_time_quadrature() {
        let e = engine();
        for &(nu, sigma, t) in &[(3.9, -3.9, 60.0), (-0.05, -3.9, 45.0), (1.0, 2.5, 30.0)] {
            let direct = w_by_time_quadrature(&e, nu, sigma, t, 40_000);
            let closed = e.w_kernel(nu, sigma, t);
            assert!((direct - closed).norm() < 1e-6 * closed.norm().max(1.0), "{direct} {closed}");
        }
    }

    #[test]
    fn j_function_decompositions_agree() {
        let e = engine();
        for &(w, wi, t) in &[(3.9, 3.9, 4000.0), (0.05, 3.9, 4000.0), (2.0, 1.0, 300.0)] {
            let j = e.j_function(w, wi, t).unwrap();
            let via_w = Complex64::from_polar(1.0, -wi * t) * e.w_kernel(wi, w, t);
            assert!((j.value - via_w).norm() < 1e-8 * via_w.norm(), "{} {}", j.value, via_w);
        }
    }

    #[test]
    fn j_function_removable_point_matches_difference_quotient() {
        let e = engine();
        let (wi, t) = (1.3, 200.0);
        let k = 1;
        let w = wi - e.omega_d() + 2e-7;
        let j = e.j_function(w, wi, t).unwrap();
        let (_, _, taylor) = j.terms.iter().find(|(kk, _, _)| *kk == k).copied().unwrap();
        let d = w - wi + e.omega_d();
        let quotient = (e.poles.a_finite(k, w, t) - e.poles.a_finite(k, wi - e.omega_d(), t)) / (I * d);
        assert!((taylor - quotient).norm() < 1e-6 * quotient.norm(), "{taylor} {quotient}");
    }

    #[test]
    fn j_function_vanishes_at_zero_time() {
        let e = engine();
        assert_eq!(e.j_function(1.0, 2.0, 0.0).unwrap().value, Complex64::new(0.0, 0.0));
        assert!(e.j_function(1.0, 2.0, -1.0).is_err());
    }

    #[test]
    fn initial_state_is_thermal_product() {
        let e = engine();
        let pair = BandPair::new(3.9, 0.05, 5e-4, 0.1, 0.02, 0.07);
        let c = e.covariance(&pair, 0.0, Mode::Exact).unwrap();
        let nr = pair.nu(Side::R).unwrap();
        let nl = pair.nu(Side::L).unwrap();
        let expect = [[nr / 2.0, 0.0, 0.0, 0.0], [0.0, nr / 2.0, 0.0, 0.0], [0.0, 0.0, nl / 2.0, 0.0], [
            0.0,
            0.0,
            0.0,
            nl / 2.0,
        ]];
        for u in 0..4 {
            for v in 0..4 {
                assert!((c.sigma[u][v] - expect[u][v]).abs() < 1e-14);
            }
        }
        assert!((c.qq_ii - nr / (2.0 * 0.1 * 3.9)).abs() < 1e-12);
        assert!((c.pp_jj - nl * 0.1 * 0.05 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn heat_rate_vanishes_without_driving() {
        let e = CorrelatorEngine::new(System::reference().with_amplitude(0.0)).unwrap();
        for (tr, tl) in [(0.0, 0.0), (0.05, 0.05)] {
            let pair = BandPair::new(3.9, 0.05, 5e-4, 0.1, tr, tl);
            let q = e.heat_rate(&pair, Side::R).unwrap();
            assert!(q.total.abs() < 1e-20, "{q:?}");
        }
    }
}
