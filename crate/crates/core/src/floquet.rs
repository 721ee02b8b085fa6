//! Static and driven Green functions of the damped, parametrically driven
//! oscillator.
//!
//! The driven Green function has the Floquet form
//! G(t, t′) = Σ_k A_k(t − t′) e^{ikω_d t}. Its Laplace components Ã_k(s) solve
//!
//! g̃⁻¹(s + ikω_d) Ã_k(s) + Σ_{n≠0} V_n Ã_{k−n}(s) = δ_{k0},
//!
//! which we solve either by the perturbative recursion in V or exactly after
//! truncating |k| ≤ k_max. For time-domain work the truncated problem is
//! recast as an autonomous linear system (x, ẋ, memory variable per
//! harmonic) whose eigen-decomposition gives A_k(u) as a finite sum of
//! damped exponentials.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::System;
use crate::special::phase_integral;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// g̃⁻¹(s) = s² + ω_r² + s γ̃(s).
pub fn inverse_static_green(sys: &System, s: Complex64) -> Result<Complex64> {
    let wr = sys.driving.omega_r;
    Ok(s * s + wr * wr + s * sys.model.dissipation_kernel_laplace(s)?)
}

pub fn static_green(sys: &System, s: Complex64) -> Result<Complex64> {
    let inv = inverse_static_green(sys, s)?;
    let scale = 1.0 + s.norm_sqr() + sys.driving.omega_r.powi(2);
    if inv.norm() <= 1e-15 * scale {
        return Err(Error::Pole(format!("static Green function is singular at s = {s}")));
    }
    Ok(1.0 / inv)
}

/// Relative residual of Im g̃(iω) = −π I(ω) |g̃(iω)|² / 2m.
///
/// Falls back to the absolute residual when both sides vanish (γ₀ → 0).
pub fn static_fdr_residual(sys: &System, omega: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("static FDR needs omega > 0, got {omega}")));
    }
    let g = static_green(sys, Complex64::new(0.0, omega))?;
    let rhs = -PI * sys.model.spectral_density(omega)? * g.norm_sqr() / (2.0 * sys.model.mass);
    let diff = (g.im - rhs).abs();
    let scale = g.im.abs();
    Ok(if scale > 1e-300 { diff / scale } else { diff })
}

/// How the Floquet components were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Truncation {
    /// Perturbative recursion iterated `m` times from Ã⁽⁰⁾_k = δ_{k0} g̃.
    Order(usize),
    /// Direct solution of the truncated linear system.
    Exact,
}

/// The components Ã_k(s) for |k| ≤ k_max at a single complex frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetRow {
    pub s: Complex64,
    pub k_max: usize,
    pub truncation: Truncation,
    pub coeffs: Vec<Complex64>,
    /// Max-norm defect of the truncated exact system evaluated on `coeffs`.
    pub defect: f64,
    /// False when the last two recursion orders differ by more than the tolerance.
    pub converged: bool,
}

impl FloquetRow {
    pub fn get(&self, k: i32) -> Complex64 {
        let kk = self.k_max as i32;
        if k.abs() > kk {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + kk) as usize]
        }
    }
}

/// Relative tolerance between the last two recursion orders before the
/// result is flagged as unconverged.
pub const RECURSION_TOLERANCE: f64 = 0.25;

fn shifted_green(sys: &System, s: Complex64, k: i32) -> Result<Complex64> {
    static_green(sys, s + I * (k as f64 * sys.driving.omega_d))
}

/// Defect of the truncated system g̃⁻¹(s+ikω_d)Ã_k + Σ_{n≠0} V_n Ã_{k−n} − δ_{k0}.
pub fn exact_system_defect(sys: &System, s: Complex64, k_max: usize, coeffs: &[Complex64]) -> Result<f64> {
    let kk = k_max as i32;
    let h = sys.driving.harmonics();
    let mut worst: f64 = 0.0;
    for k in -kk..=kk {
        let mut r = inverse_static_green(sys, s + I * (k as f64 * sys.driving.omega_d))? * coeffs[(k + kk) as usize];
        for n in -h..=h {
            if n == 0 {
                continue;
            }
            let q = k - n;
            if q.abs() <= kk {
                r += sys.driving.fourier(n) * coeffs[(q + kk) as usize];
            }
        }
        if k == 0 {
            r -= 1.0;
        }
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Perturbative recursion at complex frequency s.
pub fn recursion_at(sys: &System, s: Complex64, order: usize, k_max: usize) -> Result<FloquetRow> {
    if k_max < order {
        return Err(Error::Contract(format!("k_max = {k_max} must be >= order = {order}")));
    }
    let kk = k_max as i32;
    let h = sys.driving.harmonics();
    let greens: Vec<Complex64> = (-kk..=kk).map(|k| shifted_green(sys, s, k)).collect::<Result<_>>()?;
    let mut cur = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
    cur[k_max] = greens[k_max];
    let mut prev = cur.clone();
    for _ in 0..order {
        let mut next = vec![Complex64::new(0.0, 0.0); 2 * k_max + 1];
        for k in -kk..=kk {
            let mut acc = if k == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
            for n in -h..=h {
                if n == 0 {
                    continue;
                }
                let q = k - n;
                if q.abs() <= kk {
                    acc -= sys.driving.fourier(n) * cur[(q + kk) as usize];
                }
            }
            next[(k + kk) as usize] = greens[(k + kk) as usize] * acc;
        }
        prev = cur;
        cur = next;
    }
    let scale = cur.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let change = cur.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let converged = order == 0 || change <= RECURSION_TOLERANCE * scale;
    let defect = exact_system_defect(sys, s, k_max, &cur)?;
    Ok(FloquetRow { s, k_max, truncation: Truncation::Order(order), coeffs: cur, defect, converged })
}

/// Ã_k(iω) from the perturbative recursion.
pub fn floquet_coefficients(sys: &System, omega: f64, order: usize, k_max: usize) -> Result<FloquetRow> {
    recursion_at(sys, Complex64::new(0.0, omega), order, k_max)
}

/// Matrix of the truncated system, indexed by k + k_max.
fn system_matrix(sys: &System, s: Complex64, k_max: usize) -> Result<DMatrix<Complex64>> {
    let kk = k_max as i32;
    let dim = 2 * k_max + 1;
    let h = sys.driving.harmonics();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for k in -kk..=kk {
        let r = (k + kk) as usize;
        m[(r, r)] = inverse_static_green(sys, s + I * (k as f64 * sys.driving.omega_d))?;
        for n in -h..=h {
            let q = k - n;
            if n != 0 && q.abs() <= kk {
                m[(r, (q + kk) as usize)] += sys.driving.fourier(n);
            }
        }
    }
    Ok(m)
}

/// Exact solution of the truncated system at complex frequency s.
pub fn exact_at(sys: &System, s: Complex64, k_max: usize) -> Result<FloquetRow> {
    let m = system_matrix(sys, s, k_max)?;
    let mut rhs = DVector::<Complex64>::zeros(2 * k_max + 1);
    rhs[k_max] = Complex64::new(1.0, 0.0);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Pole(format!("truncated Floquet system is singular at s = {s}")))?;
    let coeffs: Vec<Complex64> = sol.iter().copied().collect();
    let defect = exact_system_defect(sys, s, k_max, &coeffs)?;
    Ok(FloquetRow { s, k_max, truncation: Truncation::Exact, coeffs, defect, converged: true })
}

/// Spectral radius of the first-order correction map
/// Ã_k ↦ −g̃(s + ikω_d) Σ_{n≠0} V_n Ã_{k−n}. Values ≥ 1 signal that the
/// drive is too strong or too close to a parametric resonance for the
/// recursion.
pub fn first_order_spectral_radius(sys: &System, s: Complex64, k_max: usize) -> Result<f64> {
    let kk = k_max as i32;
    let dim = 2 * k_max + 1;
    let h = sys.driving.harmonics();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    for k in -kk..=kk {
        let g = shifted_green(sys, s, k)?;
        for n in -h..=h {
            let q = k - n;
            if n != 0 && q.abs() <= kk {
                m[((k + kk) as usize, (q + kk) as usize)] = -g * sys.driving.fourier(n);
            }
        }
    }
    let eig = complex_eigenvalues(&m);
    Ok(eig.iter().map(|e| e.norm()).fold(0.0, f64::max))
}

/// Stateless solver front end fixing k_max and the solution path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetSolver {
    pub system: System,
    pub k_max: usize,
    pub truncation: Truncation,
}

impl FloquetSolver {
    pub fn new(system: System, k_max: usize, truncation: Truncation) -> Self {
        FloquetSolver { system, k_max, truncation }
    }

    pub fn row(&self, s: Complex64) -> Result<FloquetRow> {
        match self.truncation {
            Truncation::Exact => exact_at(&self.system, s, self.k_max),
            Truncation::Order(m) => recursion_at(&self.system, s, m, self.k_max),
        }
    }

    pub fn row_at(&self, omega: f64) -> Result<FloquetRow> {
        self.row(Complex64::new(0.0, omega))
    }

    pub fn tabulate(&self, grid: &[f64]) -> Result<FloquetSolution> {
        let rows = grid.iter().map(|&w| self.row_at(w)).collect::<Result<Vec<_>>>()?;
        Ok(FloquetSolution { k_max: self.k_max, truncation: self.truncation, grid: grid.to_vec(), rows })
    }
}

/// Ã_k(iω) tabulated on a caller-supplied grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSolution {
    pub k_max: usize,
    pub truncation: Truncation,
    pub grid: Vec<f64>,
    pub rows: Vec<FloquetRow>,
}

impl FloquetSolution {
    pub fn coeff(&self, k: i32, idx: usize) -> Complex64 {
        self.rows[idx].get(k)
    }
}

/// Convention for I at negative shifted frequencies in the sideband sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NegativeFrequency {
    /// I(−ν) = −I(ν): the extension under which the sum rule is an identity.
    Odd,
    /// I(ν < 0) = 0.
    Zero,
}

/// Relative residual of the generalized sum rule
/// Im Ã_0(iω) = −π Σ_k I(ω − kω_d) |Ã_k(i(ω − kω_d))|² / 2m.
pub fn generalized_fdr_residual(solver: &FloquetSolver, omega: f64, convention: NegativeFrequency) -> Result<f64> {
    let sys = &solver.system;
    let lhs = solver.row_at(omega)?.get(0).im;
    let kk = solver.k_max as i32;
    let mut rhs = 0.0;
    for k in -kk..=kk {
        let nu = omega - k as f64 * sys.driving.omega_d;
        let weight = match (convention, nu > 0.0) {
            (_, true) => sys.model.density_or_zero(nu),
            (NegativeFrequency::Odd, false) => -sys.model.density_or_zero(-nu),
            (NegativeFrequency::Zero, false) => 0.0,
        };
        if weight == 0.0 {
            continue;
        }
        let a = solver.row_at(nu)?.get(k);
        rhs -= PI * weight * a.norm_sqr() / (2.0 * sys.model.mass);
    }
    let diff = (lhs - rhs).abs();
    Ok(if lhs.abs() > 1e-300 { diff / lhs.abs() } else { diff })
}

/// Eigenvalues of a general complex matrix via the Schur form.
pub fn complex_eigenvalues(m: &DMatrix<Complex64>) -> Vec<Complex64> {
    let schur = nalgebra::linalg::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigen-decomposition m = V diag(λ) V⁻¹ of a diagonalizable complex matrix.
pub fn complex_eigen(m: &DMatrix<Complex64>) -> (Vec<Complex64>, DMatrix<Complex64>) {
    let n = m.nrows();
    let (q, t) = nalgebra::linalg::Schur::new(m.clone()).unpack();
    let lambda: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let scale = t.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let mut y = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        y[(k, k)] = Complex64::new(1.0, 0.0);
        for j in (0..k).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for l in (j + 1)..=k {
                acc += t[(j, l)] * y[(l, k)];
            }
            let mut den = t[(j, j)] - lambda[k];
            if den.norm() < 1e-14 * scale {
                den = Complex64::new(1e-14 * scale, 0.0);
            }
            y[(j, k)] = -acc / den;
        }
    }
    let mut v = q * y;
    for k in 0..n {
        let nrm = v.column(k).norm();
        if nrm > 0.0 {
            v.column_mut(k).scale_mut(1.0 / nrm);
        }
    }
    (lambda, v)
}

/// Time-domain representation of the truncated driven Green function:
/// A_k(u) = Σ_n r_{k,n} e^{p_n u}, plus the analogous expansion of the
/// homogeneous response D(t) to an initial displacement (including the
/// initial slip of the memory term).
#[derive(Debug, Clone)]
pub struct FloquetPoles {
    pub k_max: usize,
    pub omega_d: f64,
    pub poles: Vec<Complex64>,
    /// r[k + k_max][n] for the response to an initial velocity kick.
    pub green_residues: Vec<Vec<Complex64>>,
    /// Same for an initial unit displacement.
    pub displacement_residues: Vec<Vec<Complex64>>,
}

impl FloquetPoles {
    pub fn new(sys: &System, k_max: usize) -> Result<Self> {
        let kk = k_max as i32;
        let nh = 2 * k_max + 1;
        let dim = 3 * nh;
        let lam = sys.model.cutoff;
        let g0l = sys.model.gamma0 * lam;
        let wr2 = sys.driving.omega_r.powi(2);
        let h = sys.driving.harmonics();
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for k in -kk..=kk {
            let b = 3 * (k + kk) as usize;
            let shift = -I * (k as f64 * sys.driving.omega_d);
            m[(b, b)] = shift;
            m[(b, b + 1)] = Complex64::new(1.0, 0.0);
            m[(b + 1, b)] = Complex64::new(-wr2, 0.0);
            m[(b + 1, b + 1)] = shift;
            m[(b + 1, b + 2)] = Complex64::new(-1.0, 0.0);
            m[(b + 2, b + 1)] = Complex64::new(g0l, 0.0);
            m[(b + 2, b + 2)] = shift - lam;
            for n in -h..=h {
                let q = k - n;
                if n != 0 && q.abs() <= kk {
                    let c = 3 * (q + kk) as usize;
                    m[(b + 1, c)] -= sys.driving.fourier(n);
                }
            }
        }
        let (poles, v) = complex_eigen(&m);
        let lu = v.clone().lu();
        let centre = 3 * k_max;
        let mut kick = DVector::<Complex64>::zeros(dim);
        kick[centre + 1] = Complex64::new(1.0, 0.0);
        let mut disp = DVector::<Complex64>::zeros(dim);
        disp[centre] = Complex64::new(1.0, 0.0);
        disp[centre + 2] = Complex64::new(g0l, 0.0);
        let ck = lu
            .solve(&kick)
            .ok_or_else(|| Error::Degenerate("Floquet generator is not diagonalizable".into()))?;
        let cd = lu
            .solve(&disp)
            .ok_or_else(|| Error::Degenerate("Floquet generator is not diagonalizable".into()))?;
        let residues = |c: &DVector<Complex64>| -> Vec<Vec<Complex64>> {
            (0..nh).map(|kidx| (0..dim).map(|n| v[(3 * kidx, n)] * c[n]).collect()).collect()
        };
        let green_residues = residues(&ck);
        let displacement_residues = residues(&cd);
        if poles.iter().any(|p| p.re >= 0.0) {
            return Err(Error::Validity(
                "driven Green function is not decaying (parametric instability or undamped system)".into(),
            ));
        }
        Ok(FloquetPoles { k_max, omega_d: sys.driving.omega_d, poles, green_residues, displacement_residues })
    }

    fn idx(&self, k: i32) -> Option<usize> {
        let kk = self.k_max as i32;
        (k.abs() <= kk).then(|| (k + kk) as usize)
    }

    /// A_k(u).
    pub fn a_time(&self, k: i32, u: f64) -> Complex64 {
        match self.idx(k) {
            None => Complex64::new(0.0, 0.0),
            Some(i) => self.green_residues[i].iter().zip(&self.poles).map(|(r, p)| r * (p * u).exp()).sum(),
        }
    }

    /// Ã_k(s) = Σ_n r_{k,n}/(s − p_n).
    pub fn a_laplace(&self, k: i32, s: Complex64) -> Complex64 {
        match self.idx(k) {
            None => Complex64::new(0.0, 0.0),
            Some(i) => self.green_residues[i].iter().zip(&self.poles).map(|(r, p)| r / (s - p)).sum(),
        }
    }

    /// a_k(iω; t) = ∫₀ᵗ A_k(u) e^{−iωu} du.
    pub fn a_finite(&self, k: i32, omega: f64, t: f64) -> Complex64 {
        match self.idx(k) {
            None => Complex64::new(0.0, 0.0),
            Some(i) => self.green_residues[i]
                .iter()
                .zip(&self.poles)
                .map(|(r, p)| r * phase_integral(p - I * omega, t))
                .sum(),
        }
    }

    /// G(t, t′) = Σ_k A_k(t − t′) e^{ikω_d t}.
    pub fn green(&self, t: f64, tp: f64) -> f64 {
        let kk = self.k_max as i32;
        (-kk..=kk)
            .map(|k| self.a_time(k, t - tp) * Complex64::from_polar(1.0, k as f64 * self.omega_d * t))
            .sum::<Complex64>()
            .re
    }

    /// Homogeneous solution for x(0) = 1, ẋ(0) = 0.
    pub fn displacement_response(&self, t: f64) -> f64 {
        let kk = self.k_max as i32;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -kk..=kk {
            let i = (k + kk) as usize;
            let a: Complex64 =
                self.displacement_residues[i].iter().zip(&self.poles).map(|(r, p)| r * (p * t).exp()).sum();
            acc += a * Complex64::from_polar(1.0, k as f64 * self.omega_d * t);
        }
        acc.re
    }
}

/// a_k(iω; t) for the default time-domain representation.
pub fn a_k_finite(poles: &FloquetPoles, k: i32, omega: f64, t: f64) -> Result<Complex64> {
    if t < 0.0 {
        return Err(Error::Domain(format!("finite-time transform needs t >= 0, got {t}")));
    }
    Ok(poles.a_finite(k, omega, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Driving, SpectralModel};

    fn reference() -> System {
        System::reference()
    }

    #[test]
    fn static_green_limits() {
        let sys = reference();
        let g = static_green(&sys, Complex64::new(0.0, 0.0)).unwrap();
        assert!((g - Complex64::new(1.0 / 16.0, 0.0)).norm() < 1e-16);
        let mut undamped = sys;
        undamped.model.gamma0 = 0.0;
        let g = static_green(&undamped, Complex64::new(0.0, 1.5)).unwrap();
        assert!((g - Complex64::new(1.0 / (16.0 - 2.25), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn static_green_on_resonance() {
        // 40-digit evaluation of 1/(s² + 16 + sγ₀Λ/(Λ + s)) at s = 4i, γ₀ = 0.005, Λ = 80
        let g = static_green(&reference(), Complex64::new(0.0, 4.0)).unwrap();
        let expect = Complex64::new(2.5, -50.0);
        assert!((g - expect).norm() < 1e-12 * expect.norm(), "{g}");
    }

    #[test]
    fn static_fdr_holds() {
        let sys = reference();
        let wr = sys.driving.omega_r;
        let g0 = sys.model.gamma0;
        for i in 0..100 {
            let w = g0 * (10.0 * wr / g0).powf(i as f64 / 99.0);
            assert!(static_fdr_residual(&sys, w).unwrap() < 1e-10);
        }
        assert!(static_fdr_residual(&sys, wr).unwrap() < 1e-10);
        let mut undamped = sys;
        undamped.model.gamma0 = 0.0;
        assert!(static_fdr_residual(&undamped, 1.0).unwrap() < 1e-12);
    }

    #[test]
    fn recursion_base_cases() {
        let sys = reference();
        let w = 3.9;
        let zero = sys.with_amplitude(0.0);
        let row = floquet_coefficients(&zero, w, 2, 3).unwrap();
        let g = static_green(&zero, Complex64::new(0.0, w)).unwrap();
        assert!((row.get(0) - g).norm() < 1e-15);
        for k in [-3, -2, -1, 1, 2, 3] {
            assert_eq!(row.get(k).norm(), 0.0);
        }
        let row = floquet_coefficients(&sys, w, 1, 3).unwrap();
        let v = sys.driving.amplitude;
        for sgn in [-1.0, 1.0] {
            let gs = static_green(&sys, Complex64::new(0.0, w + sgn * sys.driving.omega_d)).unwrap();
            let expect = -0.5 * v * gs * g;
            assert!((row.get(sgn as i32) - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn recursion_matches_exact_to_third_order() {
        let base = reference();
        let w = base.driving.omega_d - base.driving.detuning();
        let v0 = base.driving.amplitude;
        let mut last = None;
        for scale in [0.1, 0.05, 0.025] {
            let sys = base.with_amplitude(v0 * scale);
            let ex = exact_at(&sys, Complex64::new(0.0, w), 3).unwrap();
            let rc = floquet_coefficients(&sys, w, 2, 3).unwrap();
            let err = ex.coeffs.iter().zip(&rc.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            if let Some(prev) = last {
                let slope = f64::ln(prev / err) / std::f64::consts::LN_2;
                assert!(slope > 2.8, "slope {slope}");
            }
            last = Some(err);
        }
    }

    #[test]
    fn exact_solution_has_tiny_defect() {
        let sys = reference();
        let row = exact_at(&sys, Complex64::new(0.0, 3.9), 3).unwrap();
        assert!(row.defect < 1e-12);
    }

    #[test]
    fn poles_reproduce_laplace_components() {
        let sys = reference();
        let poles = FloquetPoles::new(&sys, 3).unwrap();
        for &w in &[0.05, 1.0, 1.975, 3.9, 4.0, 7.9, -2.0] {
            let s = Complex64::new(0.0, w);
            let ex = exact_at(&sys, s, 3).unwrap();
            for k in -3..=3 {
                let a = poles.a_laplace(k, s);
                let b = ex.get(k);
                assert!((a - b).norm() < 1e-9 * (1.0 + b.norm()), "k={k} w={w} {a} {b}");
            }
        }
    }

    #[test]
    fn green_function_initial_conditions() {
        let sys = reference();
        let poles = FloquetPoles::new(&sys, 3).unwrap();
        for tp in [0.0, 0.3, 1.1] {
            assert!(poles.green(tp, tp).abs() < 1e-10);
            let h = 1e-5;
            let deriv = (poles.green(tp + h, tp) - poles.green(tp - h, tp)) / (2.0 * h);
            // the derivative jump of G is 1; the backward branch is absent, so
            // compare the one-sided slope
            let slope = poles.green(tp + h, tp) / h;
            assert!((slope - 1.0).abs() < 1e-4, "{slope} {deriv}");
        }
        assert!((poles.displacement_response(0.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn undriven_pole_expansion_has_no_sidebands() {
        let sys = reference().with_amplitude(0.0);
        let poles = FloquetPoles::new(&sys, 2).unwrap();
        for u in [0.0, 1.0, 10.0] {
            assert!(poles.a_time(1, u).norm() < 1e-12);
            assert!(poles.a_finite(-2, 1.0, u).norm() < 1e-12);
        }
    }

    #[test]
    fn instability_is_reported() {
        let m = SpectralModel::new(0.0, 80.0, 0.5).unwrap();
        let d = Driving::new(1.0, 0.5, 2.0).unwrap();
        let sys = System { model: m, driving: d };
        assert!(FloquetPoles::new(&sys, 3).is_err());
    }
}
