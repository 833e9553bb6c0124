//! Spectral representation of a periodic field and the transform pair.
//!
//! The continuum convention is `fhat(xi) = (2 pi)^{-1/2} integral f(x) e^{-i x xi} dx`,
//! discretized by the trapezoid rule on the box. Coefficients are stored in
//! ascending frequency order and carry the measure-aware normalization, so
//! `sum |c_j|^2 dxi = sum |f_m|^2 dx` (Plancherel) and a pure mode `e^{i x}`
//! on a `2 pi` box has coefficient `sqrt(2 pi)` at `xi = 1`.

use crate::cutoff;
use crate::grid::Grid;
use crate::{validate, Complex64, Error, Result};
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

type PlanPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

static PLANS: OnceLock<Mutex<HashMap<usize, PlanPair>>> = OnceLock::new();

fn plans_for(n: usize) -> PlanPair {
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
        })
        .clone()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    coeffs: Vec<Complex64>,
}

/// Forward transform of physical samples taken on `grid`.
pub fn to_spectral(samples: &[Complex64], grid: &Grid) -> Result<SpectralField> {
    let n = grid.n();
    validate(
        samples.len() == n,
        format!("expected {n} samples, got {}", samples.len()),
    )?;
    validate(
        samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
        "samples contain a non-finite value",
    )?;
    let mut buf = samples.to_vec();
    let (fwd, _) = plans_for(n);
    fwd.process(&mut buf);
    // x_0 = -L/2 turns the raw DFT into the centered transform up to (-1)^k
    let scale = grid.dx() / (2.0 * std::f64::consts::PI).sqrt();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let idx = (k + n / 2) % n;
        coeffs[idx] = buf[k] * (scale * sign);
    }
    Ok(SpectralField {
        grid: grid.clone(),
        coeffs,
    })
}

/// Inverse transform back to physical samples.
pub fn to_physical(field: &SpectralField) -> Vec<Complex64> {
    let n = field.grid.n();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let idx = (k + n / 2) % n;
        buf[k] = field.coeffs[idx] * sign;
    }
    let (_, inv) = plans_for(n);
    inv.process(&mut buf);
    let scale = field.grid.dxi() / (2.0 * std::f64::consts::PI).sqrt();
    for z in buf.iter_mut() {
        *z *= scale;
    }
    buf
}

/// Multiply coefficients by `m(xi)`. Fails if the multiplier produces a
/// non-finite value on the lattice.
pub fn apply_multiplier<F>(field: &SpectralField, multiplier: F) -> Result<SpectralField>
where
    F: Fn(f64) -> Complex64,
{
    let mut out = field.clone();
    for (idx, c) in out.coeffs.iter_mut().enumerate() {
        let m = multiplier(out.grid.xi(idx));
        if !(m.re.is_finite() && m.im.is_finite()) {
            return Err(Error::Numerical(format!(
                "multiplier not finite at xi = {}",
                out.grid.xi(idx)
            )));
        }
        *c *= m;
    }
    Ok(out)
}

/// Smooth dyadic band projection with the raised-cosine annulus at scale `2^k`.
pub fn lp_project(field: &SpectralField, k: i32) -> SpectralField {
    let mut out = field.clone();
    for (idx, c) in out.coeffs.iter_mut().enumerate() {
        *c *= cutoff::psi_k(out.grid.xi(idx), k);
    }
    out
}

impl SpectralField {
    pub fn zero(grid: &Grid) -> Self {
        SpectralField {
            coeffs: vec![Complex64::new(0.0, 0.0); grid.n()],
            grid: grid.clone(),
        }
    }

    pub fn from_coeffs(grid: &Grid, coeffs: Vec<Complex64>) -> Result<Self> {
        validate(
            coeffs.len() == grid.n(),
            format!("expected {} coefficients, got {}", grid.n(), coeffs.len()),
        )?;
        Ok(SpectralField {
            grid: grid.clone(),
            coeffs,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Spectral derivative, multiplication by `i xi`.
    pub fn derivative(&self) -> SpectralField {
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            *c *= Complex64::new(0.0, out.grid.xi(idx));
        }
        out
    }

    /// Sharp indicator projection onto `2^k <= |xi| < 2^{k+1}`.
    pub fn sharp_band(&self, k: i32) -> SpectralField {
        let lo = (k as f64).exp2();
        let hi = ((k + 1) as f64).exp2();
        let mut out = self.clone();
        for (idx, c) in out.coeffs.iter_mut().enumerate() {
            let a = out.grid.xi(idx).abs();
            if !(lo..hi).contains(&a) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        out
    }

    /// Physical samples of the same trigonometric interpolant on a grid
    /// refined by `factor` (frequency zero padding). Used to evaluate sup
    /// norms without grid-sampling artifacts.
    pub fn to_physical_refined(&self, factor: usize) -> Vec<Complex64> {
        assert!(factor >= 1);
        let n = self.grid.n();
        let nn = n * factor;
        let mut buf = vec![Complex64::new(0.0, 0.0); nn];
        for idx in 0..n {
            let j = self.grid.mode(idx);
            let k = j.rem_euclid(nn as i64) as usize;
            let sign = if (j.rem_euclid(2)) == 0 { 1.0 } else { -1.0 };
            buf[k] = self.coeffs[idx] * sign;
        }
        let (_, inv) = plans_for(nn);
        inv.process(&mut buf);
        let scale = self.grid.dxi() / (2.0 * std::f64::consts::PI).sqrt();
        for z in buf.iter_mut() {
            *z *= scale;
        }
        buf
    }

    /// Largest deviation from conjugate symmetry, `max |c(-xi) - conj c(xi)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.n();
        let half = n / 2;
        let mut worst: f64 = self.coeffs[0].im.abs(); // unpaired -n/2 mode
        for j in 1..half {
            let a = self.coeffs[half + j];
            let b = self.coeffs[half - j];
            worst = worst.max((b - a.conj()).norm());
        }
        worst = worst.max(self.coeffs[half].im.abs());
        worst
    }
}

/// Forward transform of real samples.
pub fn to_spectral_real(samples: &[f64], grid: &Grid) -> Result<SpectralField> {
    let complex: Vec<Complex64> = samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    to_spectral(&complex, grid)
}

/// Trigonometric interpolant evaluated at arbitrary points:
/// `u(x) = dxi (2 pi)^{-1/2} sum_j c_j e^{i x xi_j}`, which reproduces the
/// lattice samples exactly. Phase recurrence with periodic resync keeps the
/// cost at one complex multiply per mode.
pub fn eval_physical_at(field: &SpectralField, points: &[f64]) -> Vec<Complex64> {
    let grid = field.grid();
    let n = grid.n();
    let dxi = grid.dxi();
    let scale = dxi / (2.0 * std::f64::consts::PI).sqrt();
    points
        .iter()
        .map(|&x| {
            let rot = Complex64::new((x * dxi).cos(), (x * dxi).sin());
            let mut acc = Complex64::new(0.0, 0.0);
            let mut phase = Complex64::new(0.0, 0.0);
            for idx in 0..n {
                if idx % 4096 == 0 {
                    let th = x * grid.xi(idx);
                    phase = Complex64::new(th.cos(), th.sin());
                } else {
                    phase *= rot;
                }
                acc += field.coeffs()[idx] * phase;
            }
            acc * scale
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use std::f64::consts::PI;

    const SQRT_2PI: f64 = 2.5066282746310002;

    #[test]
    fn pure_mode_calibration() {
        let g = make_grid(16, 2.0 * PI).unwrap();
        let samples: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new(x.cos(), x.sin()))
            .collect();
        let f = to_spectral(&samples, &g).unwrap();
        for idx in 0..16 {
            let want = if g.mode(idx) == 1 { SQRT_2PI } else { 0.0 };
            assert!(
                (f.coeffs()[idx] - Complex64::new(want, 0.0)).norm() < 1e-13,
                "mode {} off: {:?}",
                g.mode(idx),
                f.coeffs()[idx]
            );
        }
    }

    #[test]
    fn gaussian_matches_continuum_transform() {
        let g = make_grid(512, 40.0).unwrap();
        let samples: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new((-0.5 * x * x).exp(), 0.0))
            .collect();
        let f = to_spectral(&samples, &g).unwrap();
        for idx in 0..512 {
            let xi = g.xi(idx);
            let want = (-0.5 * xi * xi).exp();
            assert!(
                (f.coeffs()[idx].re - want).abs() < 1e-10,
                "xi={xi}: {} vs {want}",
                f.coeffs()[idx].re
            );
            assert!(f.coeffs()[idx].im.abs() < 1e-10);
        }
    }

    #[test]
    fn round_trip_and_plancherel() {
        let g = make_grid(128, 35.0).unwrap();
        let samples: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new((x * 0.7).sin() / (1.0 + x * x), 0.3 * (-x.abs()).exp()))
            .collect();
        let f = to_spectral(&samples, &g).unwrap();
        let back = to_physical(&f);
        let mut worst: f64 = 0.0;
        for (a, b) in samples.iter().zip(back.iter()) {
            worst = worst.max((a - b).norm());
        }
        assert!(worst < 1e-12, "round trip error {worst}");

        let phys: f64 = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dx();
        let spec: f64 = f.coeffs().iter().map(|z| z.norm_sqr()).sum::<f64>() * g.dxi();
        assert!((phys - spec).abs() < 1e-12 * phys.max(1.0));
    }

    #[test]
    fn refined_grid_agrees_on_common_points() {
        let g = make_grid(64, 21.0).unwrap();
        let samples: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new((-0.2 * x * x).exp() * (1.3 * x).cos(), 0.0))
            .collect();
        let f = to_spectral(&samples, &g).unwrap();
        let fine = f.to_physical_refined(4);
        for m in 0..64 {
            assert!((fine[4 * m] - samples[m]).norm() < 1e-12);
        }
    }

    #[test]
    fn multiplier_rejects_nan() {
        let g = make_grid(8, 10.0).unwrap();
        let f = SpectralField::zero(&g);
        let bad = apply_multiplier(&f, |xi| Complex64::new(xi.powf(-0.5), 0.0));
        assert!(bad.is_err()); // xi < 0 gives NaN from powf
    }

    #[test]
    fn derivative_of_sine() {
        let g = make_grid(32, 2.0 * PI).unwrap();
        let samples: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new((3.0 * x).sin(), 0.0))
            .collect();
        let f = to_spectral(&samples, &g).unwrap();
        let d = to_physical(&f.derivative());
        for (m, &x) in g.xs().iter().enumerate() {
            assert!((d[m].re - 3.0 * (3.0 * x).cos()).abs() < 1e-11);
            assert!(d[m].im.abs() < 1e-11);
        }
    }

    #[test]
    fn sharp_bands_are_disjoint_and_additive() {
        let g = make_grid(256, 100.0).unwrap();
        let samples: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new((-0.1 * x * x).exp(), 0.1 / (1.0 + x * x)))
            .collect();
        let f = to_spectral(&samples, &g).unwrap();
        let total: f64 = f.coeffs().iter().map(|z| z.norm_sqr()).sum();
        let mut by_band = 0.0;
        // lattice spans |xi| in [2 pi/100, 2.56 pi]; generous scale range
        for k in -8..=4 {
            by_band += f
                .sharp_band(k)
                .coeffs()
                .iter()
                .map(|z| z.norm_sqr())
                .sum::<f64>();
        }
        let zero_mode = f.coeffs()[128].norm_sqr();
        assert!(
            ((by_band + zero_mode) - total).abs() < 1e-10 * total,
            "band energies {by_band} + dc {zero_mode} vs {total}"
        );
    }

    #[test]
    fn hermitian_defect_detects_real_fields() {
        let g = make_grid(64, 30.0).unwrap();
        let real: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new((-x * x / 9.0).exp() * (2.0 * x).cos(), 0.0))
            .collect();
        let f = to_spectral(&real, &g).unwrap();
        assert!(f.hermitian_defect() < 1e-14);

        let complex: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new(0.0, (-x * x / 9.0).exp()))
            .collect();
        let f2 = to_spectral(&complex, &g).unwrap();
        assert!(f2.hermitian_defect() > 1e-3);
    }

    #[test]
    fn point_evaluation_reproduces_lattice_and_single_modes() {
        let g = make_grid(128, 50.0).unwrap();
        let samples: Vec<Complex64> = g
            .xs()
            .iter()
            .map(|&x| Complex64::new((-x * x / 7.0).exp() * (1.1 * x).cos(), 0.0))
            .collect();
        let f = to_spectral(&samples, &g).unwrap();
        let lattice: Vec<f64> = [3usize, 64, 100].iter().map(|&m| g.x(m)).collect();
        let vals = eval_physical_at(&f, &lattice);
        for (v, &m) in vals.iter().zip(&[3usize, 64, 100]) {
            assert!((v - samples[m]).norm() < 1e-12);
        }

        // single mode has a closed form at off-lattice points
        let mut one = SpectralField::zero(&g);
        let idx = g.index_of_mode(5).unwrap();
        one.coeffs_mut()[idx] = Complex64::new(1.0, 0.0);
        let xi = g.xi(idx);
        let x = 1.2345;
        let v = eval_physical_at(&one, &[x])[0];
        let amp = g.dxi() / SQRT_2PI;
        let want = Complex64::new(amp * (x * xi).cos(), amp * (x * xi).sin());
        assert!((v - want).norm() < 1e-14);
    }

    #[test]
    fn point_evaluation_interpolates_a_resolved_gaussian() {
        // a Gaussian is resolved to machine precision here, so trigonometric
        // interpolation must reproduce it at arbitrary points
        let g = make_grid(8192, 60.0).unwrap();
        let samples: Vec<f64> = g.xs().iter().map(|&x| (-x * x).exp()).collect();
        let f = to_spectral_real(&samples, &g).unwrap();
        let points = [0.1234567, 1.7, -3.05, 4.499999, -0.000271];
        let vals = eval_physical_at(&f, &points);
        for (v, &x) in vals.iter().zip(&points) {
            let want = (-x * x).exp();
            assert!(
                (v.re - want).abs() < 1e-12 && v.im.abs() < 1e-12,
                "at x = {x}: {v} vs {want}"
            );
        }
    }
}
