//! Norms used by the diagnostics: Lebesgue, Sobolev, the weighted H^{1,1},
//! and the weighted sup norm controlling the scattering profile.

use crate::field::{to_physical, to_spectral, SpectralField};
use crate::Complex64;

/// Order of the high Sobolev norm in the smallness reports.
pub const HIGH_SOBOLEV_ORDER: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    L2,
    Linf,
    /// `H^s` with weight `(1+xi^2)^s` on the squared coefficients.
    Hs(f64),
    /// `H^{100}`, the high-regularity norm in the smallness bookkeeping.
    Hn0,
    /// `|| <x> g ||_{H^1}`, computed spectrally after weighting in x.
    H11,
    /// `max_xi (|xi|^{(1-alpha)/4} + |xi|^{10}) |fhat(xi)|` for this alpha.
    Z(f64),
}

/// Weight of the scattering sup norm.
pub fn z_weight(alpha: f64, xi: f64) -> f64 {
    let a = xi.abs();
    a.powf((1.0 - alpha) / 4.0) + a.powi(10)
}

pub fn compute_norm(field: &SpectralField, kind: NormKind) -> f64 {
    match kind {
        NormKind::L2 => {
            let s: f64 = field.coeffs().iter().map(|c| c.norm_sqr()).sum();
            (s * field.grid().dxi()).sqrt()
        }
        NormKind::Linf => to_physical(field)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max),
        NormKind::Hs(s) => sobolev(field, s),
        NormKind::Hn0 => sobolev(field, HIGH_SOBOLEV_ORDER),
        NormKind::H11 => {
            let g = field.grid();
            let phys = to_physical(field);
            let weighted: Vec<Complex64> = phys
                .iter()
                .enumerate()
                .map(|(m, z)| z * (1.0 + g.x(m) * g.x(m)).sqrt())
                .collect();
            let h = to_spectral(&weighted, g).expect("weighting preserves validity");
            sobolev(&h, 1.0)
        }
        NormKind::Z(alpha) => {
            let g = field.grid();
            field
                .coeffs()
                .iter()
                .enumerate()
                .map(|(idx, c)| z_weight(alpha, g.xi(idx)) * c.norm())
                .fold(0.0, f64::max)
        }
    }
}

/// `(sum (1+xi^2)^s |c|^2 dxi)^{1/2}`, with the weight applied at half
/// power before squaring so large `s` stays inside f64 range.
fn sobolev(field: &SpectralField, s: f64) -> f64 {
    let g = field.grid();
    let mut acc = 0.0f64;
    for (idx, c) in field.coeffs().iter().enumerate() {
        let xi = g.xi(idx);
        let half_weight = ((1.0 + xi * xi).ln() * (0.5 * s)).exp();
        let t = half_weight * c.norm();
        acc += t * t;
    }
    (acc * g.dxi()).sqrt()
}
