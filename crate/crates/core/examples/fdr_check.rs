//! Fluctuation-dissipation residuals: the static identity on a log grid and
//! the driven generalization with both negative-frequency conventions.

use driven_qbm::floquet::{generalized_fdr_residual, static_fdr_residual, FloquetSolver, NegativeFrequency, Truncation};
use driven_qbm::model::System;

fn main() -> Result<(), driven_qbm::Error> {
    let sys = System::reference();
    let (lo, hi) = (sys.model.gamma0, 10.0 * sys.driving.omega_r);
    let mut worst = 0.0f64;
    for k in 0..100 {
        let w = lo * (hi / lo).powf(k as f64 / 99.0);
        worst = worst.max(static_fdr_residual(&sys, w)?);
    }
    println!("static residual, max over [{lo}, {hi}]: {worst:.2e}");

    let solver = FloquetSolver::new(sys, 4, Truncation::Exact);
    println!("{:>8} {:>12} {:>12}", "omega", "odd", "zero");
    for w in [0.5, 1.0, 2.0, 3.5, 4.0, 6.0] {
        let odd = generalized_fdr_residual(&solver, w, NegativeFrequency::Odd)?;
        let zero = generalized_fdr_residual(&solver, w, NegativeFrequency::Zero)?;
        println!("{w:8.2} {odd:12.3e} {zero:12.3e}");
    }
    Ok(())
}
