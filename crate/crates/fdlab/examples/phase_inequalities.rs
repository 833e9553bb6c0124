//! The ordered power-sum inequality behind the phase-correction estimates:
//! for a >= b >= c > 0 the normalized margin stays strictly positive on both
//! sides of alpha = 0. Closed-form spot values plus a Monte Carlo minimum.

use fdlab::scatter::{phase_inequality_check, phase_ratio};

fn main() -> fdlab::Result<()> {
    // at a = b = c = 1 the margins have closed forms
    let spot_pos = phase_ratio(0.5, 1.0, 1.0, 1.0);
    println!(
        "alpha = +1/2, a = b = c = 1: margin {spot_pos:.12} (exact 3 sqrt 3 - 3 = {:.12})",
        3.0 * 3f64.sqrt() - 3.0
    );
    let spot_neg = phase_ratio(-0.5, 1.0, 1.0, 1.0);
    println!(
        "alpha = -1/2, a = b = c = 1: margin {spot_neg:.12} (exact 3 - sqrt 3 = {:.12})",
        3.0 - 3f64.sqrt()
    );

    println!("\nMonte Carlo minimum over log-uniform triples in [1e-4, 1e4]^3:");
    for alpha in [-0.75, -0.5, -0.25, 0.25, 0.5, 0.75] {
        let r = phase_inequality_check(alpha, 1_000_000, 20240229)?;
        println!(
            "  alpha = {:+.2}: min margin {:.6e} at (a, b, c) = ({:.3e}, {:.3e}, {:.3e})",
            r.alpha, r.min_ratio, r.worst[0], r.worst[1], r.worst[2]
        );
    }
    println!("(margins shrink as alpha -> 0 but stay positive; the correction");
    println!(" constant in the scattering phase degenerates in the same limit)");
    Ok(())
}
