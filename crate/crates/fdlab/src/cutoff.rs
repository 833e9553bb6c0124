//! Raised-cosine frequency cutoffs and the dyadic partition built from them.

/// Low-pass bump: 1 on `|u| <= 1`, `cos^2(pi(|u|-1)/2)` on `1 < |u| < 2`,
/// 0 beyond. C^1, even, supported in `[-2, 2]`.
pub fn phi(u: f64) -> f64 {
    let a = u.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let c = (0.5 * std::f64::consts::PI * (a - 1.0)).cos();
        c * c
    }
}

/// Annular bump `psi(u) = phi(u) - phi(2u)`, supported in `1/2 <= |u| <= 2`.
pub fn psi(u: f64) -> f64 {
    phi(u) - phi(2.0 * u)
}

/// Dyadic piece at scale `2^k`: `psi_k(xi) = psi(xi / 2^k)`.
pub fn psi_k(xi: f64, k: i32) -> f64 {
    psi(xi * (-k as f64).exp2())
}

/// Range of scales whose annuli meet the lattice `dxi <= |xi| <= xi_max`.
pub fn scale_range(dxi: f64, xi_max: f64) -> std::ops::RangeInclusive<i32> {
    let lo = (dxi.log2().floor() as i32) - 1;
    let hi = (xi_max.log2().ceil() as i32) + 1;
    lo..=hi
}
