//! Small numerical helpers shared by the analytic modules.

use num_complex::Complex64;

/// e^w − 1 without cancellation for small |w|.
pub fn cexpm1(w: Complex64) -> Complex64 {
    let (s, c) = w.im.sin_cos();
    let half = (0.5 * w.im).sin();
    let em1 = w.re.exp_m1();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

/// E(z, t) = ∫₀ᵗ e^{zτ} dτ = (e^{zt} − 1)/z, with E(0, t) = t.
pub fn phase_integral(z: Complex64, t: f64) -> Complex64 {
    let w = z * t;
    if w.norm() < 1e-8 {
        // series keeps full relative precision near the removable point
        return t * (1.0 + w * (0.5 + w / 6.0));
    }
    cexpm1(w) / z
}

/// sin(x)/x with sinc(0) = 1.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}
