//! The periodic box stands in for the whole line. For data whose frequency
//! content is compactly supported and whose physical spread stays well inside
//! the box, the periodic free flow matches the whole-line oscillatory
//! integral pointwise.

use fdlab::equation::{EquationKind, Sign};
use fdlab::field::{eval_physical_at, SpectralField};
use fdlab::linear::{evolve_linear, whole_line_oracle};
use fdlab::{make_grid, Complex64, EquationSpec};

fn main() -> fdlab::Result<()> {
    let spec = EquationSpec::new(EquationKind::Fkdv, 0.5, Sign::Focusing)?;
    let grid = make_grid(2048, 600.0)?;

    // smooth bump in frequency, supported on [1/2, 2]
    let ghat = |xi: f64| -> Complex64 {
        if xi <= 0.5 || xi >= 2.0 {
            return Complex64::new(0.0, 0.0);
        }
        let u = (xi - 0.5) / 1.5;
        let bump = (-1.0 / (u * (1.0 - u))).exp();
        Complex64::new(bump, 0.0)
    };
    let mut f = SpectralField::zero(&grid);
    for idx in 0..grid.n() {
        f.coeffs_mut()[idx] = ghat(grid.xi(idx));
    }

    for t in [1.0, 4.0, 16.0] {
        let evolved = evolve_linear(&f, t, &spec);
        println!("t = {t:4.1}:");
        for x in [0.0, 2.5, 10.0, 40.0] {
            let exact = whole_line_oracle(&ghat, (0.5, 2.0), x, t, &spec)?;
            let on_grid = eval_physical_at(&evolved, &[x])[0];
            println!(
                "  u({x:5.1}) periodic {:+.10e} {:+.10e}i, whole line {:+.10e} {:+.10e}i, diff {:.2e}",
                on_grid.re,
                on_grid.im,
                exact.re,
                exact.im,
                (on_grid - exact).norm()
            );
        }
    }
    println!("(differences are the box-periodization error; they grow once the");
    println!(" dispersive tails wrap around the ends of the box)");
    Ok(())
}
