//! Sweeps behind the CLI subcommands. Each run returns a [`Table`] that is
//! written as CSV under a one-line `#` JSON header echoing the resolved
//! configuration.

use std::collections::BTreeSet;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{RunConfig, SCHEMA_VERSION};
use crate::correlators::{CorrelatorEngine, Mode};
use crate::entanglement::{
    cycle_averaged_negativity, entanglement_spectrum, log_negativity, rate_finite_t, two_mode_covariance,
    PairThreshold, TwoModeCovariance, MIN_SAMPLES_PER_PERIOD,
};
use crate::error::Result;
use crate::floquet::{generalized_fdr_residual, static_fdr_residual, FloquetSolver, NegativeFrequency, Truncation};
use crate::model::{BandPair, Side, System};
use crate::oracle::{DiscreteBath, FloquetOracle, GridLayout, OracleOptions};

/// Physicality slack before a covariance counts as a validity violation.
pub const PHYSICALITY_SLACK: f64 = 1e-9;

/// Horizon safety factor against the oracle's recurrence time.
pub const ORACLE_SAFETY: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Floquet,
    FdrCheck,
    Energy,
    Heat,
    Spectrum,
    Threshold,
    Oracle,
    Figure2,
    Figure3,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Floquet => "floquet",
            Command::FdrCheck => "fdr-check",
            Command::Energy => "energy",
            Command::Heat => "heat",
            Command::Spectrum => "spectrum",
            Command::Threshold => "threshold",
            Command::Oracle => "oracle",
            Command::Figure2 => "figure2",
            Command::Figure3 => "figure3",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub command: Command,
    pub config: RunConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
    /// Validity-window violations; the CLI writes the table and exits 3.
    pub violations: Vec<String>,
    pub meta: Map<String, Value>,
}

impl Table {
    fn new(command: Command, config: &RunConfig, columns: &[&str]) -> Self {
        Table {
            command,
            config: config.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            warnings: Vec::new(),
            violations: Vec::new(),
            meta: Map::new(),
        }
    }

    fn warn<I: IntoIterator<Item = String>>(&mut self, w: I) {
        let mut set: BTreeSet<String> = self.warnings.drain(..).collect();
        set.extend(w);
        self.warnings = set.into_iter().collect();
    }

    fn check(&mut self, cov: &TwoModeCovariance, what: &str) {
        let p = cov.physicality();
        if p < -PHYSICALITY_SLACK {
            self.violations.push(format!("{what} at t = {}: min eig(sigma + i Omega/2) = {p:.3e}", cov.t));
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|x| x == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }

    pub fn header(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command.name(),
            "config": self.config.to_json(),
            "warnings": self.warnings,
            "violations": self.violations,
            "meta": self.meta,
        })
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# {}", self.header())?;
        writeln!(out, "{}", self.columns.join(","))?;
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Table> {
    match command {
        Command::Floquet => run_floquet(cfg),
        Command::FdrCheck => run_fdr_check(cfg),
        Command::Energy => run_energy(cfg, Command::Energy),
        Command::Heat => run_heat(cfg),
        Command::Spectrum => run_spectrum(cfg, Command::Spectrum),
        Command::Threshold => run_threshold_sweep(cfg),
        Command::Oracle => run_oracle(cfg),
        Command::Figure2 => run_figure2(cfg),
        Command::Figure3 => run_figure3(cfg),
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// ω_i grid over (0, ω_d) for spectra: 30% of the points per edge at
/// spacing γ₀ (capped to fit), the rest spread uniformly over the middle.
pub fn spectrum_grid(omega_d: f64, gamma0: f64, n: usize) -> Vec<f64> {
    let e = 3 * n / 10;
    let h = gamma0.min(omega_d / (4.0 * (e as f64 + 1.0)));
    let edge = e as f64 * h;
    let m = n - 2 * e;
    let mut g: Vec<f64> = (1..=e).map(|k| k as f64 * h).collect();
    g.extend((1..=m).map(|k| edge + (omega_d - 2.0 * edge) * k as f64 / (m + 1) as f64));
    g.extend((1..=e).rev().map(|k| omega_d - k as f64 * h));
    g
}

/// Sweep grid over ω_i: the configured range if given, else `default`.
fn band_grid(cfg: &RunConfig, default: impl FnOnce() -> Vec<f64>) -> Vec<f64> {
    match (cfg.omega_min, cfg.omega_max) {
        (None, None) => default(),
        (a, b) => {
            let wd = cfg.omega_d();
            let a = a.unwrap_or(wd / (cfg.grid_points + 1) as f64);
            let b = b.unwrap_or(wd - wd / (cfg.grid_points + 1) as f64);
            linspace(a, b, cfg.grid_points)
        }
    }
}

fn interior(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|k| a + (b - a) * k as f64 / (n + 1) as f64).collect()
}

fn engine(cfg: &RunConfig, sweep: bool) -> Result<CorrelatorEngine> {
    Ok(CorrelatorEngine::with_truncation(cfg.system()?, cfg.k_max)?.with_settings(cfg.continuum(sweep)))
}

/// Ã_k(iω) on a grid (default [γ₀, 2ω_r]).
pub fn run_floquet(cfg: &RunConfig) -> Result<Table> {
    let sys = cfg.system()?;
    let truncation = cfg.order.map_or(Truncation::Exact, Truncation::Order);
    let solver = FloquetSolver::new(sys, cfg.k_max, truncation);
    let grid = linspace(cfg.omega_min.unwrap_or(cfg.gamma0), cfg.omega_max.unwrap_or(2.0 * cfg.omega_r), cfg.grid_points);
    let rows = grid.par_iter().map(|&w| solver.row_at(w)).collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(Command::Floquet, cfg, &["omega", "k", "re", "im", "residual_exact_system"]);
    let kk = cfg.k_max as i32;
    for r in &rows {
        if !r.converged {
            t.warn([format!("recursion not converged at omega = {}", r.s.im)]);
        }
        for k in -kk..=kk {
            let a = r.get(k);
            t.rows.push(vec![r.s.im, k as f64, a.re, a.im, r.defect]);
        }
    }
    t.meta.insert("truncation".into(), json!(format!("{truncation:?}")));
    Ok(t)
}

/// Static and generalized sum-rule residuals on a grid (default [γ₀, 2ω_r]).
pub fn run_fdr_check(cfg: &RunConfig) -> Result<Table> {
    let sys = cfg.system()?;
    let exact = FloquetSolver::new(sys, cfg.k_max, Truncation::Exact);
    let order = cfg.order.unwrap_or(2);
    let recursion = FloquetSolver::new(sys, cfg.k_max, Truncation::Order(order));
    let grid = linspace(cfg.omega_min.unwrap_or(cfg.gamma0), cfg.omega_max.unwrap_or(2.0 * cfg.omega_r), cfg.grid_points);
    let rows = grid
        .par_iter()
        .map(|&w| {
            Ok(vec![
                w,
                static_fdr_residual(&sys, w)?,
                generalized_fdr_residual(&exact, w, NegativeFrequency::Odd)?,
                generalized_fdr_residual(&exact, w, NegativeFrequency::Zero)?,
                generalized_fdr_residual(&recursion, w, NegativeFrequency::Odd)?,
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(
        Command::FdrCheck,
        cfg,
        &["omega", "static_residual", "generalized_residual_exact", "generalized_residual_exact_zero_extension", "generalized_residual_order"],
    );
    t.rows = rows;
    t.meta.insert("order".into(), json!(order));
    Ok(t)
}

fn oracle_for(cfg: &RunConfig, sys: &System, pair: &BandPair, horizon: f64) -> Result<FloquetOracle> {
    let layout = GridLayout::for_pair(sys, pair.omega_i, pair.omega_j, pair.delta_omega);
    let bath = DiscreteBath::windowed(&sys.model, &layout, pair.m_i)?;
    bath.check_horizon(horizon, ORACLE_SAFETY)?;
    let tracked = bath.band_modes.clone();
    let periods = (horizon / sys.driving.period()).ceil() as usize + 1;
    let opts = OracleOptions { steps_per_period: cfg.oracle_steps_per_period, samples_per_period: MIN_SAMPLES_PER_PERIOD };
    FloquetOracle::new(bath, sys.driving, tracked, periods, opts)
}

fn oracle_meta(t: &mut Table, o: &FloquetOracle) {
    t.meta.insert("oracle_modes".into(), json!(o.bath.len()));
    t.meta.insert("oracle_recurrence_time".into(), json!(o.bath.recurrence_time()));
    t.meta.insert("oracle_steps_per_period".into(), json!(o.options.steps_per_period));
}

/// Energy of band i: exact curve and affine asymptote, plus the oracle
/// when the source asks for it (times then snap to the oracle's slots).
pub fn run_energy(cfg: &RunConfig, command: Command) -> Result<Table> {
    let sys = cfg.system()?;
    let pair = cfg.pair();
    let eng = engine(cfg, false)?;
    let mut times = linspace(0.0, cfg.t_end(), cfg.t_points);
    let mut cols = vec![];
    if cfg.source.analytic() {
        cols.extend(["E_i_exact", "E_i_asymptote"]);
    }
    let oracle = if cfg.source.oracle() {
        cols.push("E_i_oracle");
        let o = oracle_for(cfg, &sys, &pair, cfg.t_end())?;
        times = times.iter().map(|&t| { let (n, j) = o.slot(t); o.time(n, j) }).collect();
        Some(o)
    } else {
        None
    };
    let mut header = vec!["t"];
    header.extend(cols);
    let mut t = Table::new(command, cfg, &header);
    let mut columns = vec![times.clone()];
    if cfg.source.analytic() {
        let covs = eng.covariances(&pair, &times, Mode::Exact)?;
        for c in &covs {
            t.warn(c.warnings.clone());
            let cov = TwoModeCovariance::from_array(c.sigma, c.t);
            t.check(&cov, "exact covariance");
        }
        columns.push(covs.iter().map(|c| c.energy(Side::R)).collect());
        let asym = eng.covariances(&pair, &times, Mode::Longtime)?;
        columns.push(asym.iter().map(|c| c.energy(Side::R)).collect());
        let q = eng.heat_rate(&pair, Side::R)?;
        t.meta.insert("heat_rate".into(), json!(q.total));
    }
    if let Some(o) = &oracle {
        let e = times
            .par_iter()
            .map(|&tt| {
                let (n, j) = o.slot(tt);
                let cov = o.two_mode(0, 1, n, j, (pair.t_r, pair.t_l))?;
                Ok(0.5 * pair.omega_i * (cov.sigma[(0, 0)] + cov.sigma[(1, 1)]))
            })
            .collect::<Result<Vec<f64>>>()?;
        columns.push(e);
        oracle_meta(&mut t, o);
    }
    t.rows = (0..times.len()).map(|r| columns.iter().map(|c| c[r]).collect()).collect();
    Ok(t)
}

/// Heat current into band i across ω_i ∈ (0, ω_d) with partner ω_d − ω_i.
pub fn run_heat(cfg: &RunConfig) -> Result<Table> {
    let eng = engine(cfg, true)?;
    let wd = cfg.omega_d();
    let grid = band_grid(cfg, || interior(0.0, wd, cfg.grid_points));
    let base = cfg.pair();
    let rows = grid
        .par_iter()
        .map(|&wi| {
            let pair = BandPair { omega_i: wi, omega_j: wd - wi, ..base };
            let q = eng.heat_rate(&pair, Side::R)?;
            let c = eng.heat_rate_closed_form(&pair)?;
            Ok(vec![wi, wd - wi, q.total, q.transport, q.pair_creation, c.total_density, c.left_density])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(
        Command::Heat,
        cfg,
        &["omega_i", "omega_j", "Q_dot", "Q_dot_transport", "Q_dot_pair_creation", "Q_dot_closed_form", "Q_dot_closed_form_left"],
    );
    t.rows = rows;
    Ok(t)
}

/// Cycle-averaged E_N(ω_i)/E₀ at t_end for matched pairs.
pub fn run_spectrum(cfg: &RunConfig, command: Command) -> Result<Table> {
    let eng = engine(cfg, true)?;
    let wd = cfg.omega_d();
    let grid = band_grid(cfg, || spectrum_grid(wd, cfg.gamma0, cfg.grid_points));
    let tmpl = cfg.pair();
    let t_end = cfg.t_end();
    let mut cols = vec!["omega_i/gamma0", "E_N_exact/E0", "E_N_analytic/E0", "omega_i", "omega_j", "Gamma0", "Gamma_N", "S_ij"];
    if cfg.source.oracle() {
        cols.push("E_N_oracle/E0");
    }
    let mut t = Table::new(command, cfg, &cols);
    let points = if cfg.source.analytic() {
        Some(entanglement_spectrum(&eng, &tmpl, &grid, t_end, cfg.mode)?)
    } else {
        None
    };
    let mut oracle_col = Vec::new();
    if cfg.source.oracle() {
        // one oracle build per band pair; sequential because each build is
        // already the expensive part
        let sys = cfg.system()?;
        for &wi in &grid {
            let pair = BandPair { omega_i: wi, omega_j: wd - wi, ..tmpl };
            let o = oracle_for(cfg, &sys, &pair, t_end)?;
            let samples = MIN_SAMPLES_PER_PERIOD;
            let (n, _) = o.slot(t_end - o.period);
            let mut vals = Vec::with_capacity(samples + 1);
            for s in 0..=samples {
                let (nn, j) = if s == samples { (n + 1, 0) } else { (n, s) };
                let cov = o.two_mode(0, 1, nn, j, (pair.t_r, pair.t_l))?;
                t.check(&cov, "oracle covariance");
                vals.push(log_negativity(&cov)?.e_n);
            }
            // trapezoid over one period
            let avg = (vals[1..samples].iter().sum::<f64>() + 0.5 * (vals[0] + vals[samples])) / samples as f64;
            oracle_col.push(avg);
            oracle_meta(&mut t, &o);
        }
    }
    for (k, &wi) in grid.iter().enumerate() {
        let pair = BandPair { omega_i: wi, omega_j: wd - wi, ..tmpl };
        let (e0, row) = match &points {
            Some(p) => {
                let p = &p[k];
                let r = &p.rates;
                (r.e0, vec![wi / cfg.gamma0, p.e_n / r.e0, p.e_n_analytic / r.e0, wi, p.omega_j, r.gamma0, r.gamma_n, r.s_ij])
            }
            None => {
                let r = rate_finite_t(&cfg.system()?, &pair)?;
                let nan = f64::NAN;
                (r.e0, vec![wi / cfg.gamma0, nan, r.predicted(t_end) / r.e0, wi, wd - wi, r.gamma0, r.gamma_n, r.s_ij])
            }
        };
        let mut row = row;
        if cfg.source.oracle() {
            row.push(oracle_col[k] / e0);
        }
        t.rows.push(row);
    }
    if points.is_some() {
        // spot-check physicality at the sweep time for the validity flag
        let probe: Vec<_> = grid.iter().step_by((grid.len() / 10).max(1)).copied().collect();
        for wi in probe {
            let pair = BandPair { omega_i: wi, omega_j: wd - wi, ..tmpl };
            let cov = two_mode_covariance(&eng, &pair, t_end, cfg.mode)?;
            t.warn(cov.warnings.clone());
            t.check(&cov, "exact covariance");
        }
    }
    t.meta.insert("t".into(), json!(t_end));
    Ok(t)
}

/// Which baths a threshold sweep heats.
fn heated_temperatures(cfg: &RunConfig, temp: f64) -> (f64, f64) {
    match cfg.panel {
        crate::config::Panel::B => (cfg.t_r, temp),
        _ => (temp, temp),
    }
}

/// E_N(T) of the configured pair at t_end for T ∈ [0, t_star_factor·T*],
/// with the predicted threshold of the pair. `panel = b` heats only the
/// left bath (T_R stays as configured); otherwise both baths share T.
pub fn run_threshold_sweep(cfg: &RunConfig) -> Result<Table> {
    let sys = cfg.system()?;
    let eng = engine(cfg, true)?;
    let pair = cfg.pair();
    let th = PairThreshold::new(&sys, &pair)?;
    let one_sided = cfg.panel == crate::config::Panel::B;
    let t_star = if one_sided { th.left.t_star } else { th.symmetric() };
    let n_star = if one_sided || th.left.t_star < th.right.t_star { th.left.n_star } else { th.right.n_star };
    let temps = linspace(0.0, cfg.t_star_factor * t_star, cfg.t_points);
    let t_end = cfg.t_end();
    let rows = temps
        .par_iter()
        .map(|&temp| {
            let (tr, tl) = heated_temperatures(cfg, temp);
            let p = BandPair { t_r: tr, t_l: tl, ..pair };
            let e = cycle_averaged_negativity(&eng, &p, t_end, MIN_SAMPLES_PER_PERIOD, cfg.mode)?;
            let a = rate_finite_t(&sys, &p)?.predicted(t_end);
            Ok(vec![pair.omega_i, n_star, t_star, temp, temp / t_star, e, a])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(
        Command::Threshold,
        cfg,
        &["omega_i", "n_star", "T_star", "T", "T/T_star", "E_N_exact", "E_N_analytic"],
    );
    t.rows = rows;
    t.meta.insert("threshold".into(), serde_json::to_value(th).expect("plain data"));
    t.meta.insert("heated".into(), json!(if one_sided { "left" } else { "both" }));
    Ok(t)
}

/// Analytic and oracle energies and E_N of the configured pair over
/// [0, t_end], at the oracle's output slots.
pub fn run_oracle(cfg: &RunConfig) -> Result<Table> {
    let sys = cfg.system()?;
    let pair = cfg.pair();
    let o = oracle_for(cfg, &sys, &pair, cfg.t_end())?;
    let eng = engine(cfg, false)?;
    let times: Vec<f64> = linspace(0.0, cfg.t_end(), cfg.t_points)
        .iter()
        .map(|&t| {
            let (n, j) = o.slot(t);
            o.time(n, j)
        })
        .collect();
    let covs = eng.covariances(&pair, &times, cfg.mode)?;
    let mut t = Table::new(
        Command::Oracle,
        cfg,
        &["t", "E_i_exact", "E_i_oracle", "E_j_exact", "E_j_oracle", "E_N_exact", "E_N_oracle", "sigma_dev_rel_error"],
    );
    oracle_meta(&mut t, &o);
    for (c, &tt) in covs.iter().zip(&times) {
        t.warn(c.warnings.clone());
        let (n, j) = o.slot(tt);
        let oc = o.two_mode(0, 1, n, j, (pair.t_r, pair.t_l))?;
        let an = TwoModeCovariance::from_array(c.sigma, tt);
        t.check(&oc, "oracle covariance");
        let base = TwoModeCovariance::thermal(pair.nu(Side::R)?, pair.nu(Side::L)?).sigma;
        let da = an.sigma - base;
        let dn = oc.sigma - base;
        let rel = if da.norm() > 0.0 { (dn - da).norm() / da.norm() } else { (dn - da).norm() };
        let ei = |s: &nalgebra::Matrix4<f64>, w: f64, o: usize| 0.5 * w * (s[(o, o)] + s[(o + 1, o + 1)]);
        t.rows.push(vec![
            tt,
            ei(&an.sigma, pair.omega_i, 0),
            ei(&oc.sigma, pair.omega_i, 0),
            ei(&an.sigma, pair.omega_j, 2),
            ei(&oc.sigma, pair.omega_j, 2),
            log_negativity(&an)?.e_n,
            log_negativity(&oc)?.e_n,
            rel,
        ]);
    }
    Ok(t)
}

/// Energy curve with the figure's defaults; identical to `energy`.
pub fn run_figure2(cfg: &RunConfig) -> Result<Table> {
    run_energy(cfg, Command::Figure2)
}

/// Spectrum with the panel's temperatures (T_R, T_L in the config are
/// replaced).
pub fn run_figure3(cfg: &RunConfig) -> Result<Table> {
    let mut c = cfg.clone();
    let (tr, tl) = cfg.panel.temperatures(cfg.gamma0);
    c.t_r = tr;
    c.t_l = tl;
    run_spectrum(&c, Command::Figure3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(sets: &[&str]) -> RunConfig {
        RunConfig::load(None, &sets.iter().map(|s| s.to_string()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn spectrum_grid_shape() {
        let g = spectrum_grid(3.95, 0.005, 100);
        assert_eq!(g.len(), 100);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(g.iter().any(|&w| (w - 0.05).abs() < 1e-12));
        assert!(g.iter().any(|&w| (w - 3.9).abs() < 1e-12));
        assert!(g[0] > 0.0 && *g.last().unwrap() < 3.95);
    }

    #[test]
    fn floquet_table_has_all_harmonics() {
        let t = run(Command::Floquet, &cfg(&["grid_points=3", "k_max=2"])).unwrap();
        assert_eq!(t.rows.len(), 15);
        assert_eq!(t.columns, ["omega", "k", "re", "im", "residual_exact_system"]);
    }

    #[test]
    fn csv_header_echoes_config() {
        let t = run(Command::Heat, &cfg(&["grid_points=4", "T_L=0.05"])).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let first = text.lines().next().unwrap();
        let h: Value = serde_json::from_str(first.strip_prefix("# ").unwrap()).unwrap();
        assert_eq!(h["schema_version"], 1);
        assert_eq!(h["config"]["T_L"], 0.05);
        assert_eq!(h["config"]["V"], 0.5);
        assert_eq!(text.lines().count(), 2 + 4);
    }

    #[test]
    fn undriven_heat_vanishes() {
        let t = run(Command::Heat, &cfg(&["grid_points=5", "V=0"])).unwrap();
        assert!(t.column("Q_dot").unwrap().iter().all(|&q| q == 0.0));
    }

    #[test]
    fn flat_energy_without_drive() {
        let t = run(Command::Energy, &cfg(&["V=0", "t_points=3", "t_end=400"])).unwrap();
        let e = t.column("E_i_exact").unwrap();
        assert!((e[0] - 1.95).abs() < 1e-9);
        for v in e {
            assert!((v - 1.95).abs() < 2e-3 * 1.95, "{v}");
        }
    }
}
