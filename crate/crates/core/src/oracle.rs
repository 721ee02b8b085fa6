//! Discrete-bath reference: the system plus N explicit oscillators evolved
//! as an exact Gaussian state.
//!
//! Two propagators share one bath description.
//!
//! * [`propagate_covariance`] integrates the Lyapunov equation
//!   dσ/dt = Aσ + σAᵀ for the full covariance with fixed-step RK4. It is
//!   O(N²) per step and meant for small N.
//! * [`FloquetOracle`] integrates the propagator Φ(τ, 0) over a single drive
//!   period with the same RK4 rule, then reaches late times through powers
//!   of the monodromy matrix M = Φ(P, 0). Only rows of Φ belonging to the
//!   tracked modes are kept, so band covariances at t = nP + τ cost a few
//!   row-times-matrix products.
//!
//! State ordering is (x, p, q_1, p_1, …, q_N, p_N).

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::entanglement::TwoModeCovariance;
use crate::error::{Error, Result};
use crate::model::{planck_occupation, Driving, Side, SpectralModel, System};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Partition {
    /// Alternate R and L nodes; each carries twice the grid weight of its
    /// own bath.
    Interleaved,
    /// Each node carries both baths. Only the combination that couples to x
    /// matters, so its occupation is the density-weighted mean.
    Merged,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathMode {
    pub omega: f64,
    pub lambda: f64,
    pub mass: f64,
    /// Cell width represented by the mode.
    pub weight: f64,
    /// I_R and I_L carried by the mode (per unit frequency).
    pub density_r: f64,
    pub density_l: f64,
}

impl BathMode {
    fn new(omega: f64, weight: f64, density_r: f64, density_l: f64, mass: f64) -> Self {
        let lambda = (mass * omega * (density_r + density_l) * weight).sqrt();
        BathMode { omega, lambda, mass, weight, density_r, density_l }
    }

    /// Occupation of the coupled combination.
    pub fn occupation(&self, t_r: f64, t_l: f64) -> Result<f64> {
        let d = self.density_r + self.density_l;
        if d == 0.0 {
            return Ok(0.0);
        }
        let nr = planck_occupation(self.omega, t_r)?;
        let nl = planck_occupation(self.omega, t_l)?;
        Ok((self.density_r * nr + self.density_l * nl) / d)
    }
}

/// Where the grid is fine and which band cells must exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridLayout {
    pub omega_max: f64,
    /// Spacing inside the windows; sets the recurrence time 2π/fine_step.
    pub fine_step: f64,
    pub coarse_step: f64,
    /// Relative growth of the spacing per node outside the windows.
    pub growth: f64,
    /// (centre, half width).
    pub windows: Vec<(f64, f64)>,
    /// Band cells (centre, side, width). The band node carries only its own
    /// bath; a companion node at the same frequency carries the other one.
    pub bands: Vec<(f64, Side, f64)>,
}

impl GridLayout {
    /// Fine windows of half width 7γ₀ around ω_r and both bands with
    /// spacing Δω, coarse elsewhere up to 10ω_r.
    pub fn for_pair(system: &System, omega_i: f64, omega_j: f64, delta_omega: f64) -> Self {
        let wr = system.driving.omega_r;
        let half_width = 7.0 * system.model.gamma0;
        GridLayout {
            omega_max: 10.0 * wr,
            fine_step: delta_omega,
            coarse_step: 0.05 * wr,
            growth: 0.3,
            windows: vec![(wr, half_width), (omega_i, half_width), (omega_j, half_width)],
            bands: vec![(omega_i, Side::R, delta_omega), (omega_j, Side::L, delta_omega)],
        }
    }

    fn spacing(&self, w: f64) -> f64 {
        let d = self
            .windows
            .iter()
            .map(|&(c, h)| ((w - c).abs() - h).max(0.0))
            .fold(f64::INFINITY, f64::min);
        let d = if d.is_finite() { d } else { f64::INFINITY };
        (self.fine_step + self.growth * d).min(self.coarse_step).max(self.fine_step)
    }

    /// Cell edges covering [a, b] with local spacing ≈ spacing(ω).
    fn fill(&self, a: f64, b: f64) -> Vec<f64> {
        if b - a <= 0.0 {
            return Vec::new();
        }
        // cumulative ∫ dω/h on a fine sample, then equal steps in that variable
        let samples = (((b - a) / self.fine_step).ceil() as usize).clamp(16, 2_000_000);
        let dw = (b - a) / samples as f64;
        let mut cum = Vec::with_capacity(samples + 1);
        cum.push(0.0);
        for s in 0..samples {
            let w = a + (s as f64 + 0.5) * dw;
            cum.push(cum[s] + dw / self.spacing(w));
        }
        let total = cum[samples];
        let cells = (total.round() as usize).max(1);
        let mut edges = vec![a];
        let mut s = 0;
        for c in 1..cells {
            let target = total * c as f64 / cells as f64;
            while cum[s + 1] < target {
                s += 1;
            }
            let f = (target - cum[s]) / (cum[s + 1] - cum[s]);
            edges.push(a + (s as f64 + f) * dw);
        }
        edges.push(b);
        edges
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteBath {
    pub model: SpectralModel,
    pub modes: Vec<BathMode>,
    /// γ(0) = Σ λ²/(m_k ω_k² m), added to the simulated potential.
    pub counterterm: f64,
    /// Largest spacing where the grid is meant to mimic a continuum.
    pub resolved_spacing: f64,
    pub partition: Partition,
    /// Mode indices of the band cells, in layout order.
    pub band_modes: Vec<usize>,
}

impl DiscreteBath {
    fn finish(model: SpectralModel, modes: Vec<BathMode>, resolved_spacing: f64, partition: Partition, band_modes: Vec<usize>) -> Self {
        let m = model.mass;
        let counterterm = modes.iter().map(|k| k.lambda * k.lambda / (k.mass * k.omega * k.omega * m)).sum();
        DiscreteBath { model, modes, counterterm, resolved_spacing, partition, band_modes }
    }

    /// N modes on a uniform grid of cell midpoints over [lo, hi].
    pub fn uniform(model: &SpectralModel, n: usize, range: (f64, f64), partition: Partition, mass: f64) -> Result<Self> {
        let (lo, hi) = range;
        if n < 1 || !(lo >= 0.0 && hi > lo) {
            return Err(Error::Domain(format!("need N >= 1 and 0 <= lo < hi (got {n}, {lo}, {hi})")));
        }
        model.validate()?;
        let dw = (hi - lo) / n as f64;
        let sr = model.split(Side::R);
        let sl = model.split(Side::L);
        let modes: Vec<BathMode> = (0..n)
            .map(|k| {
                let w = lo + (k as f64 + 0.5) * dw;
                let i = model.density_or_zero(w);
                match partition {
                    Partition::Merged => BathMode::new(w, dw, sr * i, sl * i, mass),
                    Partition::Interleaved if k % 2 == 0 => BathMode::new(w, 2.0 * dw, sr * i, 0.0, mass),
                    Partition::Interleaved => BathMode::new(w, 2.0 * dw, 0.0, sl * i, mass),
                }
            })
            .collect();
        let spacing = match partition {
            Partition::Merged => dw,
            Partition::Interleaved => 2.0 * dw,
        };
        Ok(Self::finish(*model, modes, spacing, partition, Vec::new()))
    }

    /// Non-uniform merged grid from a layout.
    pub fn windowed(model: &SpectralModel, layout: &GridLayout, mass: f64) -> Result<Self> {
        model.validate()?;
        if !(layout.fine_step > 0.0 && layout.coarse_step >= layout.fine_step && layout.omega_max > 0.0) {
            return Err(Error::Domain("grid layout needs 0 < fine_step <= coarse_step".into()));
        }
        let mut cells: Vec<(f64, f64)> = layout.bands.iter().map(|&(c, _, w)| (c - 0.5 * w, c + 0.5 * w)).collect();
        cells.sort_by(|a, b| a.0.total_cmp(&b.0));
        // an R band and an L band on the same cell share it: the cell's own
        // node and its companion are then the two bands
        let coincide = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(1.0);
        let shared = |x: &(f64, f64), y: &(f64, f64)| coincide(x.0, y.0) && coincide(x.1, y.1);
        for (k, x) in layout.bands.iter().enumerate() {
            if layout.bands[..k].iter().any(|y| coincide(x.0, y.0) && (x.1 == y.1 || x.2 != y.2)) {
                return Err(Error::Contract("band cells overlap".into()));
            }
        }
        cells.dedup_by(|x, y| shared(x, y));
        for w in cells.windows(2) {
            if w[1].0 < w[0].1 - 1e-15 {
                return Err(Error::Contract("band cells overlap".into()));
            }
        }
        if cells.first().is_some_and(|c| c.0 <= 0.0) || cells.last().is_some_and(|c| c.1 >= layout.omega_max) {
            return Err(Error::Domain("band cells must lie inside (0, omega_max)".into()));
        }
        let sr = model.split(Side::R);
        let sl = model.split(Side::L);
        let mut modes = Vec::new();
        let push_gap = |a: f64, b: f64, modes: &mut Vec<BathMode>| {
            let e = layout.fill(a, b);
            for w in e.windows(2) {
                let c = 0.5 * (w[0] + w[1]);
                let i = model.density_or_zero(c);
                modes.push(BathMode::new(c, w[1] - w[0], sr * i, sl * i, mass));
            }
        };
        let mut band_at = Vec::new();
        let mut left = 0.0;
        for &(a, b) in &cells {
            push_gap(left, a, &mut modes);
            let c = 0.5 * (a + b);
            let (_, side, width) = *layout
                .bands
                .iter()
                .find(|x| (x.0 - c).abs() < 1e-12 * c.max(1.0))
                .expect("cell comes from a band");
            let i = model.density_or_zero(c);
            let (own, other) = match side {
                Side::R => (BathMode::new(c, width, sr * i, 0.0, mass), BathMode::new(c, width, 0.0, sl * i, mass)),
                Side::L => (BathMode::new(c, width, 0.0, sl * i, mass), BathMode::new(c, width, sr * i, 0.0, mass)),
            };
            band_at.push((c, side, modes.len()));
            band_at.push((c, side.other(), modes.len() + 1));
            modes.push(own);
            modes.push(other);
            left = b;
        }
        push_gap(left, layout.omega_max, &mut modes);
        // report band indices in the layout's order
        let band_modes = layout
            .bands
            .iter()
            .map(|&(c, side, _)| {
                band_at
                    .iter()
                    .find(|x| coincide(x.0, c) && x.1 == side)
                    .map(|x| x.2)
                    .expect("band placed")
            })
            .collect();
        let resolved = layout.fine_step.max(layout.bands.iter().map(|b| b.2).fold(0.0, f64::max));
        Ok(Self::finish(*model, modes, resolved, Partition::Merged, band_modes))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// 2π/δω over the resolved part of the grid.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.resolved_spacing
    }

    /// Refuse horizons closer than `safety`× to the recurrence time.
    pub fn check_horizon(&self, horizon: f64, safety: f64) -> Result<()> {
        let t_rec = self.recurrence_time();
        if t_rec < safety * horizon {
            let need = safety * horizon * self.len() as f64 / t_rec;
            return Err(Error::Validity(format!(
                "recurrence time {t_rec:.1} < {safety} x horizon {horizon:.1}; about {} modes at this range would be needed",
                need.ceil()
            )));
        }
        Ok(())
    }

    /// Σ λ²/(m_k ω_k m): the discretized ∫ I dω / m.
    pub fn coupling_sum(&self) -> f64 {
        self.modes.iter().map(|k| k.lambda * k.lambda / (k.mass * k.omega * self.model.mass)).sum()
    }

    pub fn omega_max(&self) -> f64 {
        self.modes.iter().map(|k| k.omega).fold(0.0, f64::max)
    }

    /// State dimension 2(N+1).
    pub fn dim(&self) -> usize {
        2 * (self.len() + 1)
    }

    /// Diagonal of the initial covariance: system ground state of ω_r and
    /// thermal bath modes.
    pub fn initial_diagonal(&self, omega_r: f64, t_r: f64, t_l: f64) -> Result<Vec<f64>> {
        let m = self.model.mass;
        let mut d = Vec::with_capacity(self.dim());
        d.push(1.0 / (2.0 * m * omega_r));
        d.push(0.5 * m * omega_r);
        for k in &self.modes {
            let nu = 2.0 * k.occupation(t_r, t_l)? + 1.0;
            d.push(nu / (2.0 * k.mass * k.omega));
            d.push(0.5 * nu * k.mass * k.omega);
        }
        Ok(d)
    }

    /// m V_R(t) + m γ(0): the spring constant acting on x.
    fn spring(&self, driving: &Driving, t: f64) -> f64 {
        self.model.mass * (driving.potential(t) + self.counterterm)
    }

    /// out = A(t)·z for a stack of row vectors: `z` holds `cols` columns per
    /// state component, component c at z[c*cols..(c+1)*cols].
    fn apply(&self, driving: &Driving, t: f64, z: &[f64], out: &mut [f64], cols: usize) {
        let m = self.model.mass;
        let kx = self.spring(driving, t);
        let row = |c: usize| c * cols..(c + 1) * cols;
        // ẋ = p/m
        for (o, &p) in out[row(0)].iter_mut().zip(&z[row(1)]) {
            *o = p / m;
        }
        // ṗ = −k x − Σ λ q
        {
            let (head, _) = out.split_at_mut(2 * cols);
            let pdot = &mut head[cols..];
            for (o, &x) in pdot.iter_mut().zip(&z[row(0)]) {
                *o = -kx * x;
            }
            for (k, mode) in self.modes.iter().enumerate() {
                let q = &z[row(2 + 2 * k)];
                for (o, &v) in pdot.iter_mut().zip(q) {
                    *o -= mode.lambda * v;
                }
            }
        }
        let x = &z[row(0)];
        for (k, mode) in self.modes.iter().enumerate() {
            let (qi, pi) = (2 + 2 * k, 3 + 2 * k);
            let (q, p) = (&z[row(qi)], &z[row(pi)]);
            let inv = 1.0 / mode.mass;
            let s = mode.mass * mode.omega * mode.omega;
            let (lo, hi) = out.split_at_mut(pi * cols);
            for (o, &v) in lo[qi * cols..].iter_mut().zip(p) {
                *o = v * inv;
            }
            for ((o, &qv), &xv) in hi[..cols].iter_mut().zip(q).zip(x) {
                *o = -s * qv - mode.lambda * xv;
            }
        }
    }

    /// Dense drift matrix A(t).
    pub fn drift(&self, driving: &Driving, t: f64) -> DMatrix<f64> {
        let n = self.dim();
        let m = self.model.mass;
        let mut a = DMatrix::zeros(n, n);
        a[(0, 1)] = 1.0 / m;
        a[(1, 0)] = -self.spring(driving, t);
        for (k, mode) in self.modes.iter().enumerate() {
            let (q, p) = (2 + 2 * k, 3 + 2 * k);
            a[(1, q)] = -mode.lambda;
            a[(q, p)] = 1.0 / mode.mass;
            a[(p, q)] = -mode.mass * mode.omega * mode.omega;
            a[(p, 0)] = -mode.lambda;
        }
        a
    }
}

/// Build a bath from N and a frequency range (uniform grid).
pub fn build_discrete_bath(model: &SpectralModel, n: usize, range: (f64, f64), partition: Partition) -> Result<DiscreteBath> {
    DiscreteBath::uniform(model, n, range, partition, model.mass)
}

/// Covariance of the whole network.
#[derive(Debug, Clone, PartialEq)]
pub struct FullCovariance {
    pub sigma: DMatrix<f64>,
    pub t: f64,
}

impl FullCovariance {
    /// Smallest eigenvalue of σ + iΩ/2.
    pub fn physicality(&self) -> f64 {
        let n = self.sigma.nrows();
        let h = DMatrix::<Complex<f64>>::from_fn(n, n, |r, c| {
            let omega = if r / 2 == c / 2 && r != c {
                if r % 2 == 0 { 0.5 } else { -0.5 }
            } else {
                0.0
            };
            Complex::new(self.sigma[(r, c)], omega)
        });
        SymmetricEigen::new(h).eigenvalues.min()
    }
}

/// Largest step allowed by the resolution rule dt ≤ 2π/(40 ω_max).
pub fn max_step(bath: &DiscreteBath, driving: &Driving) -> f64 {
    let w = bath.omega_max().max(driving.omega_r).max(driving.omega_d);
    2.0 * PI / (40.0 * w)
}

/// RK4 on dσ/dt = Aσ + σAᵀ from the product initial state, recording every
/// `record_every` steps (and the final state).
pub fn propagate_covariance(
    bath: &DiscreteBath,
    driving: &Driving,
    temps: (f64, f64),
    t_end: f64,
    dt: f64,
    record_every: usize,
) -> Result<Vec<FullCovariance>> {
    if !(dt > 0.0 && t_end >= 0.0) {
        return Err(Error::Domain("need dt > 0 and t_end >= 0".into()));
    }
    if dt > max_step(bath, driving) * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "dt = {dt} exceeds 2pi/(40 omega_max) = {}",
            max_step(bath, driving)
        )));
    }
    let d = bath.initial_diagonal(driving.omega_r, temps.0, temps.1)?;
    let mut s = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d));
    let steps = (t_end / dt).round() as usize;
    let every = record_every.max(1);
    let rhs = |t: f64, s: &DMatrix<f64>| -> DMatrix<f64> {
        let a = bath.drift(driving, t);
        let as_ = &a * s;
        &as_ + as_.transpose()
    };
    let mut out = vec![FullCovariance { sigma: s.clone(), t: 0.0 }];
    for k in 0..steps {
        let t = k as f64 * dt;
        let k1 = rhs(t, &s);
        let k2 = rhs(t + 0.5 * dt, &(&s + &k1 * (0.5 * dt)));
        let k3 = rhs(t + 0.5 * dt, &(&s + &k2 * (0.5 * dt)));
        let k4 = rhs(t + dt, &(&s + &k3 * dt));
        s += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
        if (k + 1) % every == 0 || k + 1 == steps {
            out.push(FullCovariance { sigma: s.clone(), t: (k + 1) as f64 * dt });
        }
    }
    Ok(out)
}

/// 4×4 covariance of bath modes a and b in the dimensionless quadratures
/// X = √(m ω) q, P = p/√(m ω).
pub fn extract_two_mode(bath: &DiscreteBath, full: &FullCovariance, a: usize, b: usize) -> Result<TwoModeCovariance> {
    if a == b || a >= bath.len() || b >= bath.len() {
        return Err(Error::Domain(format!("invalid mode pair ({a}, {b})")));
    }
    let idx = [2 + 2 * a, 3 + 2 * a, 2 + 2 * b, 3 + 2 * b];
    let scale = two_mode_scale(bath, a, b);
    let s = nalgebra::Matrix4::from_fn(|r, c| full.sigma[(idx[r], idx[c])] * scale[r] * scale[c]);
    Ok(TwoModeCovariance::new(s, full.t))
}

fn two_mode_scale(bath: &DiscreteBath, a: usize, b: usize) -> [f64; 4] {
    let sa = (bath.modes[a].mass * bath.modes[a].omega).sqrt();
    let sb = (bath.modes[b].mass * bath.modes[b].omega).sqrt();
    [sa, 1.0 / sa, sb, 1.0 / sb]
}

/// Mode energy ω(⟨X²⟩ + ⟨P²⟩)/2 from the full covariance.
pub fn mode_energy(bath: &DiscreteBath, full: &FullCovariance, a: usize) -> f64 {
    let mode = &bath.modes[a];
    let (q, p) = (2 + 2 * a, 3 + 2 * a);
    0.5 * full.sigma[(p, p)] / mode.mass + 0.5 * mode.mass * mode.omega * mode.omega * full.sigma[(q, q)]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub steps_per_period: usize,
    /// Output offsets per period; must divide steps_per_period.
    pub samples_per_period: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { steps_per_period: 2048, samples_per_period: 16 }
    }
}

/// Band covariances at late times through powers of the monodromy matrix.
#[derive(Debug, Clone)]
pub struct FloquetOracle {
    pub bath: DiscreteBath,
    pub driving: Driving,
    pub options: OracleOptions,
    pub period: f64,
    /// Tracked bath modes.
    pub tracked: Vec<usize>,
    /// rows[j]: rows of Φ(jP/S, 0) for (q, p) of each tracked mode.
    rows: Vec<DMatrix<f64>>,
    /// M^(2^b).
    powers: Vec<DMatrix<f64>>,
}

impl FloquetOracle {
    /// `max_periods` bounds the n reachable in [`Self::rows_at`].
    pub fn new(bath: DiscreteBath, driving: Driving, tracked: Vec<usize>, max_periods: usize, options: OracleOptions) -> Result<Self> {
        driving.validate()?;
        let s = options.samples_per_period;
        if s == 0 || options.steps_per_period % s != 0 {
            return Err(Error::Domain("samples_per_period must divide steps_per_period".into()));
        }
        if tracked.iter().any(|&k| k >= bath.len()) {
            return Err(Error::Domain("tracked mode out of range".into()));
        }
        let period = driving.period();
        let dt = period / options.steps_per_period as f64;
        if dt > max_step(&bath, &driving) * (1.0 + 1e-12) {
            return Err(Error::Domain(format!(
                "steps_per_period = {} gives dt = {dt:.3e} above 2pi/(40 omega_max)",
                options.steps_per_period
            )));
        }
        let n = bath.dim();
        // Φ stored component-major: state component c owns phi[c*n..(c+1)*n]
        let mut phi = vec![0.0; n * n];
        for c in 0..n {
            phi[c * n + c] = 1.0;
        }
        let idx: Vec<usize> = tracked.iter().flat_map(|&k| [2 + 2 * k, 3 + 2 * k]).collect();
        let take_rows = |phi: &[f64]| DMatrix::from_fn(idx.len(), n, |r, c| phi[idx[r] * n + c]);
        let mut rows = vec![take_rows(&phi)];
        let mut k1 = vec![0.0; n * n];
        let mut k2 = vec![0.0; n * n];
        let mut k3 = vec![0.0; n * n];
        let mut k4 = vec![0.0; n * n];
        let mut tmp = vec![0.0; n * n];
        let every = options.steps_per_period / s;
        for step in 0..options.steps_per_period {
            let t = step as f64 * dt;
            bath.apply(&driving, t, &phi, &mut k1, n);
            axpy_into(&mut tmp, &phi, 0.5 * dt, &k1);
            bath.apply(&driving, t + 0.5 * dt, &tmp, &mut k2, n);
            axpy_into(&mut tmp, &phi, 0.5 * dt, &k2);
            bath.apply(&driving, t + 0.5 * dt, &tmp, &mut k3, n);
            axpy_into(&mut tmp, &phi, dt, &k3);
            bath.apply(&driving, t + dt, &tmp, &mut k4, n);
            let h = dt / 6.0;
            for i in 0..n * n {
                phi[i] += h * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            }
            if (step + 1) % every == 0 && step + 1 < options.steps_per_period {
                rows.push(take_rows(&phi));
            }
        }
        let m = DMatrix::from_row_slice(n, n, &phi);
        let bits = (usize::BITS - max_periods.max(1).leading_zeros()) as usize;
        let mut powers = vec![m];
        for b in 1..bits {
            let p = &powers[b - 1] * &powers[b - 1];
            powers.push(p);
        }
        Ok(FloquetOracle { bath, driving, options, period, tracked, rows, powers })
    }

    pub fn time(&self, n: usize, j: usize) -> f64 {
        n as f64 * self.period + j as f64 * self.period / self.options.samples_per_period as f64
    }

    /// (n, j) of the output slot closest to t.
    pub fn slot(&self, t: f64) -> (usize, usize) {
        let s = self.options.samples_per_period;
        let k = (t / self.period * s as f64).round().max(0.0) as usize;
        (k / s, k % s)
    }

    /// Rows of Φ(nP + jP/S, 0) for the tracked quadratures.
    pub fn rows_at(&self, n: usize, j: usize) -> Result<DMatrix<f64>> {
        if n >> self.powers.len() != 0 {
            return Err(Error::Domain(format!("n = {n} beyond the prepared range")));
        }
        let mut r = self.rows[j].clone();
        for (b, p) in self.powers.iter().enumerate() {
            if n >> b & 1 == 1 {
                r = &r * p;
            }
        }
        Ok(r)
    }

    /// Covariance of the tracked quadratures at slot (n, j).
    pub fn tracked_covariance(&self, n: usize, j: usize, diag0: &[f64]) -> Result<DMatrix<f64>> {
        let r = self.rows_at(n, j)?;
        let k = r.nrows();
        let mut s = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in a..k {
                let v: f64 = (0..r.ncols()).map(|c| r[(a, c)] * r[(b, c)] * diag0[c]).sum();
                s[(a, b)] = v;
                s[(b, a)] = v;
            }
        }
        Ok(s)
    }

    /// Dimensionless covariance of tracked modes (a, b) (positions in
    /// `tracked`) at slot (n, j).
    pub fn two_mode(&self, a: usize, b: usize, n: usize, j: usize, temps: (f64, f64)) -> Result<TwoModeCovariance> {
        let diag0 = self.bath.initial_diagonal(self.driving.omega_r, temps.0, temps.1)?;
        let s = self.tracked_covariance(n, j, &diag0)?;
        let scale = two_mode_scale(&self.bath, self.tracked[a], self.tracked[b]);
        let idx = [2 * a, 2 * a + 1, 2 * b, 2 * b + 1];
        let m = nalgebra::Matrix4::from_fn(|r, c| s[(idx[r], idx[c])] * scale[r] * scale[c]);
        Ok(TwoModeCovariance::new(m, self.time(n, j)))
    }
}

fn axpy_into(out: &mut [f64], x: &[f64], a: f64, y: &[f64]) {
    for ((o, &xv), &yv) in out.iter_mut().zip(x).zip(y) {
        *o = xv + a * yv;
    }
}
