//! Floquet components of the driven Green function at a few frequencies,
//! exact (truncated linear system) against the second-order recursion.

use driven_qbm::floquet::{FloquetSolver, Truncation};
use driven_qbm::model::System;

fn main() -> Result<(), driven_qbm::Error> {
    let sys = System::reference();
    let exact = FloquetSolver::new(sys, 4, Truncation::Exact);
    let order2 = FloquetSolver::new(sys, 4, Truncation::Order(2));
    let wr = sys.driving.omega_r;

    println!("{:>8} {:>3} {:>13} {:>13} {:>10}", "omega", "k", "|A_k| exact", "|A_k| ord 2", "rel diff");
    for w in [0.1 * wr, 0.5 * wr, 0.9 * wr, 1.5 * wr] {
        let a = exact.row_at(w)?;
        let b = order2.row_at(w)?;
        for k in -2..=2 {
            let (x, y) = (a.get(k), b.get(k));
            let rel = if x.norm() > 0.0 { (x - y).norm() / x.norm() } else { 0.0 };
            println!("{w:8.3} {k:3} {:13.5e} {:13.5e} {rel:10.2e}", x.norm(), y.norm());
        }
    }
    Ok(())
}
