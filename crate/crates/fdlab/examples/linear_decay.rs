//! Free-flow sup-norm decay of a unit-scale frequency band, measured against
//! the two-term dispersive bound and the t^{-1/2} reference rate.

use fdlab::linear::dispersive_bench;
use fdlab::{make_grid, EquationKind, EquationSpec, Sign};

fn main() -> fdlab::Result<()> {
    let grid = make_grid(4096, 2400.0)?;
    let times: Vec<f64> = (0..9).map(|i| 2f64.powi(i)).collect();

    for (kind, alpha) in [
        (EquationKind::Fkdv, 0.5),
        (EquationKind::Fkdv, -0.5),
        (EquationKind::Fnls, 0.5),
        (EquationKind::Fnls, -0.5),
    ] {
        let spec = EquationSpec::new(kind, alpha, Sign::Focusing)?;
        let report = dispersive_bench(&spec, 0, &times, &grid)?;
        println!(
            "{:?} alpha = {:+.1}: fitted slope {:+.4} (reference -0.5), bound constant {:.3}",
            kind, alpha, report.fitted_slope, report.fitted_constant
        );
        for (i, &t) in report.times.iter().enumerate() {
            let [t1, t2] = report.rhs_terms[i];
            println!(
                "  t = {t:6.1}: sup |u| = {:.6e}, bound terms {:.3e} + {:.3e}",
                report.lhs[i], t1, t2
            );
        }
    }
    Ok(())
}
