//! Solitary profiles by the stabilized fixed-point iteration, and the
//! power-law scaling of their mass and energy in the wave parameter.

use fdlab::equation::{EquationKind, Sign};
use fdlab::groundstate::{petviashvili, scaling_law_check};
use fdlab::{make_grid, EquationSpec};

fn main() -> fdlab::Result<()> {
    // single profiles
    let fkdv = EquationSpec::new(EquationKind::Fkdv, 0.75, Sign::Focusing)?;
    let grid = make_grid(4096, 100.0)?;
    let q = petviashvili(&fkdv, 1.0, &grid, 1e-10)?;
    let peak = q.profile.iter().cloned().fold(f64::MIN, f64::max);
    println!(
        "fkdv alpha = 0.75, c = 1: peak {:.6}, residual {:.2e}, edge value {:.2e}",
        peak, q.residual, q.edge_value
    );

    let fnls = EquationSpec::new(EquationKind::Fnls, 0.5, Sign::Focusing)?;
    let grid_nls = make_grid(2048, 100.0)?;
    let q = petviashvili(&fnls, 1.0, &grid_nls, 1e-10)?;
    let peak = q.profile.iter().cloned().fold(f64::MIN, f64::max);
    println!(
        "fnls alpha = 0.5, omega = 1: peak {:.6}, residual {:.2e}, edge value {:.2e}",
        peak, q.residual, q.edge_value
    );

    // scaling laws across a parameter sweep; Q_c(x) = sqrt(c) Q_1(c^{1/alpha} x)
    // fixes every exponent below
    let sweep = [1.0, 2.0, 4.0, 8.0];
    let grid_sweep = make_grid(131072, 200.0)?;
    let report = scaling_law_check(&fkdv, &sweep, &grid_sweep, 1e-10)?;
    println!("\nfkdv alpha = 0.75 sweep c = {sweep:?}");
    println!(
        "  mass slope {:+.5} (substitution gives (alpha-1)/alpha = {:+.5})",
        report.mass_slope,
        (0.75 - 1.0) / 0.75
    );
    println!(
        "  energy slope {:+.5} (substitution gives 2 - 1/alpha = {:+.5})",
        report.energy_slope,
        2.0 - 1.0 / 0.75
    );
    println!(
        "  half-weight slope {:+.5} (substitution gives (3 alpha - 2)/(2 alpha) = {:+.5})",
        report.half_weight_slope,
        (3.0 * 0.75 - 2.0) / (2.0 * 0.75)
    );

    let report = scaling_law_check(&fnls, &sweep, &grid_sweep, 1e-10)?;
    println!("fnls alpha = 0.5 sweep omega = {sweep:?}");
    println!(
        "  mass slope {:+.5} (substitution gives alpha/(alpha+1) = {:+.5})",
        report.mass_slope,
        0.5 / 1.5
    );
    println!(
        "  energy slope {:+.5} (substitution gives 2 - 1/(alpha+1) = {:+.5})",
        report.energy_slope,
        2.0 - 1.0 / 1.5
    );
    Ok(())
}
