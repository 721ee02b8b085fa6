//! Adaptive Gauss–Kronrod (7/15) quadrature for vector-valued integrands.
//!
//! All components share one set of panels. A panel is refined while any
//! component's accumulated error exceeds its tolerance; the panel with the
//! largest scaled error is split first.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions { rel_tol: 1e-6, abs_tol: 1e-14, max_panels: 200_000 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Vec<f64>,
    pub error: Vec<f64>,
    pub panels: usize,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
    key: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.key == o.key
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> Ordering {
        self.key.total_cmp(&o.key)
    }
}

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![0.0; dim];
    let mut g = vec![0.0; dim];
    for (idx, &x) in XGK.iter().enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sgn in nodes {
            f(c + sgn * h * x, buf);
            for d in 0..dim {
                k[d] += WGK[idx] * buf[d];
                if idx % 2 == 1 {
                    g[d] += WG[idx / 2] * buf[d];
                }
            }
        }
    }
    let err = (0..dim).map(|d| (h * (k[d] - g[d])).abs()).collect();
    (k.into_iter().map(|v| v * h).collect(), err)
}

/// Integrate `f` over [a, b] split first at `breakpoints` (those outside
/// (a, b) are ignored). `f(x, out)` writes `dim` components into `out`.
pub fn integrate<F: FnMut(f64, &mut [f64])>(
    mut f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    dim: usize,
    opts: QuadOptions,
) -> Result<QuadResult> {
    if !(b > a) {
        return Err(Error::Domain(format!("empty integration range [{a}, {b}]")));
    }
    let mut pts: Vec<f64> = breakpoints.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-15 * y.abs().max(1.0));

    let mut buf = vec![0.0; dim];
    let mut heap = BinaryHeap::new();
    let mut total = vec![0.0; dim];
    let mut total_err = vec![0.0; dim];
    let mut evaluations = 0;
    for w in pts.windows(2) {
        let (v, e) = gk15(&mut f, w[0], w[1], dim, &mut buf);
        evaluations += 15;
        for d in 0..dim {
            total[d] += v[d];
            total_err[d] += e[d];
        }
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e, key: 0.0 });
    }

    let tol = |total: &[f64], d: usize| opts.abs_tol.max(opts.rel_tol * total[d].abs());
    let rekey = |p: &mut Panel, total: &[f64]| {
        p.key = (0..dim).map(|d| p.error[d] / tol(total, d)).fold(0.0, f64::max);
    };
    let mut panels: Vec<Panel> = heap.into_vec();
    for p in panels.iter_mut() {
        rekey(p, &total);
    }
    let mut heap: BinaryHeap<Panel> = panels.into();

    let mut rekey_countdown = 64;
    loop {
        let done = (0..dim).all(|d| total_err[d] <= tol(&total, d));
        if done {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Convergence(format!(
                "quadrature did not reach tolerance with {} panels",
                heap.len()
            )));
        }
        let p = heap.pop().expect("panel heap is never empty");
        let m = 0.5 * (p.a + p.b);
        if m <= p.a || m >= p.b {
            return Err(Error::Convergence("quadrature panel reached machine resolution".into()));
        }
        let (v1, e1) = gk15(&mut f, p.a, m, dim, &mut buf);
        let (v2, e2) = gk15(&mut f, m, p.b, dim, &mut buf);
        evaluations += 30;
        for d in 0..dim {
            total[d] += v1[d] + v2[d] - p.value[d];
            total_err[d] += e1[d] + e2[d] - p.error[d];
        }
        let mut l = Panel { a: p.a, b: m, value: v1, error: e1, key: 0.0 };
        let mut r = Panel { a: m, b: p.b, value: v2, error: e2, key: 0.0 };
        rekey(&mut l, &total);
        rekey(&mut r, &total);
        heap.push(l);
        heap.push(r);
        rekey_countdown -= 1;
        if rekey_countdown == 0 {
            // tolerances drift as the totals converge
            let mut all = std::mem::take(&mut heap).into_vec();
            for p in all.iter_mut() {
                rekey(p, &total);
            }
            heap = all.into();
            rekey_countdown = 64.max(heap.len() / 4);
        }
    }
    // resum to shed accumulated rounding from the incremental updates
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    let panels = heap.len();
    for p in heap.into_vec() {
        for d in 0..dim {
            value[d] += p.value[d];
            error[d] += p.error[d];
        }
    }
    Ok(QuadResult { value, error, panels, evaluations })
}
