//! Modified-scattering diagnostics.
//!
//! The long-time behavior of small solutions is tracked through the
//! logarithmic phase integral `acc(xi,t) = int_1^t |f_hat(xi,s)|^2 ds/s`,
//! the corrected profile `w = e^{i theta} weight f_hat`, and reports that
//! measure whether `w` settles down while the bare profile keeps rotating.
//! The module also carries the scalar stationary-phase checks that back the
//! asymptotics: a model oscillatory integral with a known `2 pi` limit, the
//! windowed resonant integral against its predicted constant, and the
//! ordered power-sum inequalities controlling the phase function.

use crate::cutoff::phi;
use crate::equation::{EquationKind, EquationSpec};
use crate::field::SpectralField;
use crate::norms::z_weight;
use crate::quad::{adaptive, panel_sweep};
use crate::{validate, Complex64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

// ---------------------------------------------------------------------------
// phase accumulation

/// Per-frequency running value of `int |f_hat(xi,s)|^2 ds/s`, advanced by the
/// trapezoid rule in `log s`. The integral starts at the first time `start`
/// is called with (normally t = 1) and is nondecreasing afterwards.
#[derive(Clone, Debug)]
pub struct PhaseAccumulator {
    t_last: f64,
    started: bool,
    integral: Vec<f64>,
    last_sq: Vec<f64>,
}

impl PhaseAccumulator {
    pub fn new(n: usize) -> Self {
        PhaseAccumulator {
            t_last: 1.0,
            started: false,
            integral: vec![0.0; n],
            last_sq: vec![0.0; n],
        }
    }

    /// Anchor the integral at time `t`: integral is zero there and grows from
    /// this point on.
    pub fn start(&mut self, profile: &SpectralField, t: f64) {
        self.integral.iter_mut().for_each(|v| *v = 0.0);
        for (sq, c) in self.last_sq.iter_mut().zip(profile.coeffs()) {
            *sq = c.norm_sqr();
        }
        self.t_last = t;
        self.started = true;
    }

    pub fn update(&mut self, profile: &SpectralField, t: f64) -> Result<()> {
        validate(self.started, "accumulator not started")?;
        validate(
            t >= self.t_last,
            format!("nonmonotone accumulator time {t} after {}", self.t_last),
        )?;
        validate(
            profile.coeffs().len() == self.integral.len(),
            "profile length mismatch",
        )?;
        if t == self.t_last {
            return Ok(());
        }
        let dlog = (t / self.t_last).ln();
        for (i, c) in profile.coeffs().iter().enumerate() {
            let sq = c.norm_sqr();
            self.integral[i] += 0.5 * (self.last_sq[i] + sq) * dlog;
            self.last_sq[i] = sq;
        }
        self.t_last = t;
        Ok(())
    }

    pub fn integral(&self, idx: usize) -> f64 {
        self.integral[idx]
    }

    pub fn values(&self) -> &[f64] {
        &self.integral
    }

    pub fn t_last(&self) -> f64 {
        self.t_last
    }

    pub fn started(&self) -> bool {
        self.started
    }

    pub fn len(&self) -> usize {
        self.integral.len()
    }

    pub fn is_empty(&self) -> bool {
        self.integral.is_empty()
    }

    /// Snapshot view for persistence: `(t_last, integral, last_sq)`.
    pub fn parts(&self) -> (f64, &[f64], &[f64]) {
        (self.t_last, &self.integral, &self.last_sq)
    }

    /// Rebuild a started accumulator from persisted parts.
    pub fn from_parts(t_last: f64, integral: Vec<f64>, last_sq: Vec<f64>) -> Result<Self> {
        validate(
            integral.len() == last_sq.len(),
            "accumulator part length mismatch",
        )?;
        validate(
            t_last.is_finite() && t_last > 0.0,
            format!("bad accumulator time {t_last}"),
        )?;
        validate(
            integral.iter().chain(last_sq.iter()).all(|v| v.is_finite()),
            "non-finite accumulator values",
        )?;
        Ok(PhaseAccumulator {
            t_last,
            started: true,
            integral,
            last_sq,
        })
    }
}

pub fn accumulate_phase(acc: &mut PhaseAccumulator, profile: &SpectralField, t: f64) -> Result<()> {
    acc.update(profile, t)
}

/// Scalar phase correction at one frequency given the accumulated integral.
///
/// fKdV: `theta = sign * xi |xi|^{1-alpha} / (|alpha| (alpha+1)) * acc`
/// fNLS: `theta = -sign * |xi|^{1-alpha} / (|alpha| (alpha+1)) * acc`
pub fn phase_correction(xi: f64, acc_value: f64, spec: &EquationSpec) -> f64 {
    let denom = spec.alpha.abs() * (spec.alpha + 1.0);
    let s = spec.sign.as_f64();
    match spec.kind {
        EquationKind::Fkdv => s * xi * xi.abs().powf(1.0 - spec.alpha) / denom * acc_value,
        EquationKind::Fnls => -s * xi.abs().powf(1.0 - spec.alpha) / denom * acc_value,
    }
}

// ---------------------------------------------------------------------------
// corrected profile and convergence

#[derive(Clone, Debug)]
pub struct CorrectedProfile {
    pub t: f64,
    pub values: SpectralField,
}

/// `w(xi) = e^{i theta(xi)} (|xi|^{(1-alpha)/4} + |xi|^{10}) f_hat(xi)`.
/// The accumulator must sit at the profile's time.
pub fn corrected_profile(
    profile: &SpectralField,
    t: f64,
    acc: &PhaseAccumulator,
    spec: &EquationSpec,
) -> Result<CorrectedProfile> {
    validate(
        acc.len() == profile.coeffs().len(),
        "accumulator length mismatch",
    )?;
    validate(
        (acc.t_last() - t).abs() <= 1e-9 * t.abs().max(1.0),
        format!("accumulator at t = {} but profile at t = {t}", acc.t_last()),
    )?;
    let grid = profile.grid().clone();
    let mut values = profile.clone();
    for idx in 0..grid.n() {
        let xi = grid.xi(idx);
        let theta = phase_correction(xi, acc.integral(idx), spec);
        let rot = Complex64::new(theta.cos(), theta.sin());
        values.coeffs_mut()[idx] *= rot * z_weight(spec.alpha, xi);
    }
    Ok(CorrectedProfile { t, values })
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceReport {
    pub times: Vec<f64>,
    /// `diffs[i] = sup_xi |w(t_{i+1}) - w(t_i)|`.
    pub diffs: Vec<f64>,
    pub slope: f64,
    pub p0: f64,
    pub slope_ok: bool,
}

impl ConvergenceReport {
    /// True when the last `k` differences strictly decrease.
    pub fn tail_strictly_decreasing(&self, k: usize) -> bool {
        if self.diffs.len() < k || k < 2 {
            return false;
        }
        self.diffs[self.diffs.len() - k..]
            .windows(2)
            .all(|p| p[1] < p[0])
    }
}

/// Successive sup-norm differences of the corrected profile at the given
/// times, with a log-log slope fit compared against the target rate `-p0`
/// (0.05 slack).
pub fn convergence_report(ws: &[CorrectedProfile], p0: f64) -> Result<ConvergenceReport> {
    validate(ws.len() >= 3, "need at least 3 corrected profiles")?;
    validate(
        p0 > 0.0 && p0 <= 1e-3,
        format!("p0 = {p0} outside the admissible range"),
    )?;
    validate(
        ws.windows(2).all(|p| p[1].t > p[0].t),
        "profile times must increase",
    )?;
    let mut times = Vec::new();
    let mut diffs = Vec::new();
    for pair in ws.windows(2) {
        let a = pair[0].values.coeffs();
        let b = pair[1].values.coeffs();
        validate(a.len() == b.len(), "profile size mismatch in series")?;
        let sup = a
            .iter()
            .zip(b)
            .map(|(x, y)| (y - x).norm())
            .fold(0.0, f64::max);
        times.push(pair[0].t);
        diffs.push(sup);
    }
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(&diffs)
        .filter(|(_, &d)| d > 0.0)
        .map(|(&t, &d)| (t, d))
        .collect();
    let slope = if pts.len() >= 2 {
        fit_loglog(&pts).0
    } else {
        f64::NEG_INFINITY
    };
    Ok(ConvergenceReport {
        times,
        diffs,
        slope,
        p0,
        slope_ok: slope <= -p0 + 0.05,
    })
}

// ---------------------------------------------------------------------------
// decay fit

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points_used: usize,
}

/// Least-squares slope of `log value` against `log t` over the window.
/// Requires at least 8 points spanning 1.5 decades.
pub fn decay_fit(series: &[(f64, f64)], window: (f64, f64)) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|&(t, v)| t >= window.0 && t <= window.1 && t > 0.0 && v > 0.0)
        .collect();
    validate(
        pts.len() >= 8,
        format!("decay fit needs >= 8 points, got {}", pts.len()),
    )?;
    let (lo, hi) = pts
        .iter()
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), &(t, _)| {
            (lo.min(t), hi.max(t))
        });
    validate(
        hi / lo >= 10f64.powf(1.5),
        format!("decay fit window spans only {:.2} decades", (hi / lo).log10()),
    )?;
    let (slope, intercept, stderr) = fit_loglog(&pts);
    Ok(DecayFit {
        slope,
        intercept,
        stderr,
        points_used: pts.len(),
    })
}

pub(crate) fn fit_loglog(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let stderr = if pts.len() > 2 {
        (ss_res / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

// ---------------------------------------------------------------------------
// phase drift

#[derive(Clone, Copy, Debug)]
pub struct PhaseSample {
    pub t: f64,
    pub fhat: Complex64,
    pub acc: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PhaseDriftReport {
    pub xi0: f64,
    pub tv_raw: f64,
    pub tv_corrected: f64,
    pub ratio: f64,
}

/// Total variation of the unwrapped phase of `f_hat(xi0, t)` with and without
/// the accumulated correction. A small ratio means the correction captures
/// the rotation.
pub fn phase_drift_report(
    xi0: f64,
    samples: &[PhaseSample],
    spec: &EquationSpec,
) -> Result<PhaseDriftReport> {
    validate(samples.len() >= 3, "need at least 3 phase samples")?;
    let max_mod = samples.iter().map(|s| s.fhat.norm()).fold(0.0, f64::max);
    if samples.iter().any(|s| s.fhat.norm() < 1e-10 * max_mod) {
        return Err(Error::Numerical(format!(
            "modulus too small at xi = {xi0} for a phase to be defined"
        )));
    }
    let raw: Vec<f64> = samples.iter().map(|s| s.fhat.arg()).collect();
    let corrected: Vec<f64> = samples
        .iter()
        .map(|s| {
            let theta = phase_correction(xi0, s.acc, spec);
            (s.fhat * Complex64::new(theta.cos(), theta.sin())).arg()
        })
        .collect();
    let tv = |angles: &[f64]| -> f64 {
        unwrap_angles(angles)
            .windows(2)
            .map(|p| (p[1] - p[0]).abs())
            .sum()
    };
    let tv_raw = tv(&raw);
    let tv_corrected = tv(&corrected);
    let ratio = if tv_raw > 0.0 {
        tv_corrected / tv_raw
    } else if tv_corrected == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(PhaseDriftReport {
        xi0,
        tv_raw,
        tv_corrected,
        ratio,
    })
}

fn unwrap_angles(angles: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(angles.len());
    let mut offset = 0.0;
    for (i, &a) in angles.iter().enumerate() {
        if i > 0 {
            let prev = angles[i - 1];
            let mut d = a - prev;
            while d > PI {
                d -= 2.0 * PI;
                offset -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
                offset += 2.0 * PI;
            }
        }
        out.push(a + offset);
    }
    out
}

// ---------------------------------------------------------------------------
// stationary-phase model integral

/// Fourier transform of the standard cutoff: `int phi(u) e^{iuw} du`.
/// Closed form `pi^2 (sin w + sin 2w) / (w (pi^2 - w^2))` with series
/// fallbacks at the removable points w = 0 and |w| = pi.
pub(crate) fn model_g(w: f64) -> f64 {
    let a = w.abs();
    let p2 = PI * PI;
    if a < 0.01 {
        // (sin w + sin 2w)/w = 3 - (3/2) w^2 + (11/40) w^4 + ...
        let w2 = a * a;
        let c2 = 3.0 / p2 - 1.5;
        let c4 = 3.0 / (p2 * p2) - 1.5 / p2 + 11.0 / 40.0;
        3.0 + c2 * w2 + c4 * w2 * w2
    } else if (a - PI).abs() < 0.01 {
        // with u = |w| - pi: g = -pi^2 (1 - 7u^2/6 + 31u^4/120) / ((pi+u)(2pi+u))
        let u = a - PI;
        let u2 = u * u;
        -p2 * (1.0 - 7.0 / 6.0 * u2 + 31.0 / 120.0 * u2 * u2) / ((PI + u) * (2.0 * PI + u))
    } else {
        p2 * (a.sin() + (2.0 * a).sin()) / (a * (p2 - a * a))
    }
}

/// Remainder `int_b^inf sin(c w) h(w) dw` for `h = pi^2/(w(pi^2 - w^2))`,
/// by three integrations by parts (b far beyond the poles).
fn model_tail_ibp(c: f64, b: f64) -> f64 {
    let p2 = PI * PI;
    let d = p2 * b - b * b * b;
    let d1 = p2 - 3.0 * b * b;
    let d2 = -6.0 * b;
    let h0 = p2 / d;
    let h1 = -p2 * d1 / (d * d);
    let h2 = p2 * (2.0 * d1 * d1 / (d * d * d) - d2 / (d * d));
    (c * b).cos() * h0 / c - (c * b).sin() * h1 / (c * c) - (c * b).cos() * h2 / (c * c * c)
}

/// Exact deviation of the model integral from its `2 pi` limit:
/// `N^2 iint phi(x) phi(y) e^{i N^2 x y} dx dy - 2 pi`, computed in a
/// cancellation-free form so values far below machine epsilon of `2 pi`
/// remain meaningful.
pub fn stationary_phase_model_deviation(n: f64) -> Result<f64> {
    validate(n.is_finite() && n >= 1.0, format!("need N >= 1, got {n}"))?;
    let n2 = n * n;
    let panel = PI / 4.0;
    let transition = panel_sweep(
        &|w: f64| {
            let s = (0.5 * PI * (w / n2 - 1.0)).sin();
            Complex64::new(s * s * model_g(w), 0.0)
        },
        n2,
        2.0 * n2,
        panel,
    );
    let b = 2.0 * n2 + 16384.0;
    let swept_tail = panel_sweep(&|w: f64| Complex64::new(model_g(w), 0.0), 2.0 * n2, b, panel);
    let rest = model_tail_ibp(1.0, b) + model_tail_ibp(2.0, b);
    Ok(-2.0 * (transition.value.re + swept_tail.value.re + rest))
}

/// The model integral itself; approaches `2 pi` like `N^{-1/2}` or faster.
pub fn stationary_phase_model_check(n: f64) -> Result<f64> {
    Ok(2.0 * PI + stationary_phase_model_deviation(n)?)
}

// ---------------------------------------------------------------------------
// resonant asymptotic check

/// Dyadic window width `2^{l}` with `l` the smallest integer such that
/// `2^l >= 2^{(1-alpha)k/2} 2^{-49m/100}`, `k = floor(log2 |xi|)`,
/// `m = floor(log2 s)`.
pub fn resonance_window(xi: f64, s: f64, alpha: f64) -> f64 {
    let k = xi.abs().log2().floor();
    let m = s.log2().floor();
    let t = (0.5 * (1.0 - alpha) * k - 0.49 * m).exp2();
    t.log2().ceil().exp2()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResonantReport {
    pub alpha: f64,
    pub xi: f64,
    pub s: f64,
    pub window: f64,
    pub j_re: f64,
    pub j_im: f64,
    pub asym_re: f64,
    pub asym_im: f64,
    /// `|J/asym - 1|`, or 0 when both sides vanish.
    pub deviation: f64,
}

/// Windowed resonant integral against its stationary-phase prediction.
///
/// `J = W^2 iint phi(x) phi(y) g(xi+Wx) g(xi+Wy) conj(g(xi+W(x+y)))
///      e^{i s Phi} dx dy` with
/// `Phi = Lam(xi+Wx) + Lam(xi+Wy) - Lam(xi+W(x+y)) - Lam(xi)`, compared to
/// `2 pi |xi|^{1-alpha} / (s |alpha| (alpha+1)) |g(xi)|^2 g(xi)`.
pub fn resonant_asymptotic_check(
    profile: &dyn Fn(f64) -> Complex64,
    xi: f64,
    s: f64,
    spec: &EquationSpec,
) -> Result<ResonantReport> {
    spec.validate()?;
    validate(s >= 100.0, format!("need s >= 100, got {s}"))?;
    validate(xi != 0.0 && xi.is_finite(), "xi must be finite and nonzero")?;
    let w = resonance_window(xi, s, spec.alpha);
    let lam = |x: f64| spec.dispersion(x);
    let base = lam(xi);
    let inner_tol = 1e-11;
    let outer_tol = 1e-10;
    let outer = adaptive(
        &|x: f64| {
            let px = phi(x);
            if px == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let gx = profile(xi + w * x);
            let inner = adaptive(
                &|y: f64| {
                    let py = phi(y);
                    if py == 0.0 {
                        return Complex64::new(0.0, 0.0);
                    }
                    let ph = s * (lam(xi + w * x) + lam(xi + w * y) - lam(xi + w * (x + y)) - base);
                    profile(xi + w * y)
                        * profile(xi + w * (x + y)).conj()
                        * Complex64::new(ph.cos(), ph.sin())
                        * py
                },
                -2.0,
                2.0,
                inner_tol,
                4000,
            );
            gx * inner.value * px
        },
        -2.0,
        2.0,
        outer_tol,
        4000,
    );
    let j = outer.value * (w * w);
    let g0 = profile(xi);
    let asym = g0 * g0 * g0.conj() * 2.0 * PI * xi.abs().powf(1.0 - spec.alpha)
        / (s * spec.alpha.abs() * (spec.alpha + 1.0));
    let scale = j.norm().max(asym.norm());
    let deviation = if scale < 1e-300 {
        0.0
    } else {
        (j / asym - Complex64::new(1.0, 0.0)).norm()
    };
    Ok(ResonantReport {
        alpha: spec.alpha,
        xi,
        s,
        window: w,
        j_re: j.re,
        j_im: j.im,
        asym_re: asym.re,
        asym_im: asym.im,
        deviation,
    })
}

// ---------------------------------------------------------------------------
// phase inequalities

/// Normalized margin of the ordered power-sum inequality at `a >= b >= c > 0`.
///
/// alpha in (0,1): `((a+b+c)^{1+alpha} - a^{1+alpha} - b^{1+alpha}
///                   - c^{1+alpha}) / (b a^alpha)`
/// alpha in (-1,0): `(a^{1+alpha} + b^{1+alpha} + c^{1+alpha}
///                   - (a+b+c)^{1+alpha}) / a^{1+alpha}`
pub fn phase_ratio(alpha: f64, a: f64, b: f64, c: f64) -> f64 {
    let p = alpha + 1.0;
    if alpha > 0.0 {
        ((a + b + c).powf(p) - a.powf(p) - b.powf(p) - c.powf(p)) / (b * a.powf(alpha))
    } else {
        (a.powf(p) + b.powf(p) + c.powf(p) - (a + b + c).powf(p)) / a.powf(p)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct InequalityReport {
    pub alpha: f64,
    pub n_samples: usize,
    pub seed: u64,
    pub min_ratio: f64,
    pub worst: [f64; 3],
}

/// Monte Carlo minimum of the inequality margin over log-uniform triples in
/// `[1e-4, 1e4]^3`, sorted so `a >= b >= c`. Chunked so the result does not
/// depend on the number of worker threads.
pub fn phase_inequality_check(alpha: f64, n_samples: usize, seed: u64) -> Result<InequalityReport> {
    validate(
        alpha != 0.0 && alpha > -1.0 && alpha < 1.0,
        format!("alpha = {alpha} outside (-1,1) \\ {{0}}"),
    )?;
    validate(n_samples > 0, "need at least one sample")?;
    const CHUNK: usize = 8192;
    let chunks = n_samples.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                seed ^ (chunk as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            );
            let count = CHUNK.min(n_samples - chunk * CHUNK);
            let mut min_ratio = f64::INFINITY;
            let mut worst = [0.0; 3];
            for _ in 0..count {
                let mut v = [0.0; 3];
                for x in v.iter_mut() {
                    let u: f64 = rng.gen();
                    *x = 10f64.powf(-4.0 + 8.0 * u);
                }
                v.sort_by(|p, q| q.total_cmp(p));
                let r = phase_ratio(alpha, v[0], v[1], v[2]);
                if r < min_ratio {
                    min_ratio = r;
                    worst = v;
                }
            }
            (min_ratio, worst)
        })
        .reduce(
            || (f64::INFINITY, [0.0; 3]),
            |a, b| if b.0 < a.0 { b } else { a },
        );
    Ok(InequalityReport {
        alpha,
        n_samples,
        seed,
        min_ratio: best.0,
        worst: best.1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equation::Sign;
    use crate::field::to_spectral_real;
    use crate::quad::adaptive_real;
    use crate::grid::make_grid;
    use proptest::prelude::*;

    fn kdv(sign: Sign) -> EquationSpec {
        EquationSpec::new(EquationKind::Fkdv, 0.5, sign).unwrap()
    }

    fn nls(sign: Sign) -> EquationSpec {
        EquationSpec::new(EquationKind::Fnls, 0.5, sign).unwrap()
    }

    fn uniform_field(grid: &crate::grid::Grid, value: f64) -> SpectralField {
        let mut f = SpectralField::zero(grid);
        for c in f.coeffs_mut() {
            *c = Complex64::new(value, 0.0);
        }
        f
    }

    #[test]
    fn accumulator_is_exact_for_constant_modulus() {
        let grid = make_grid(8, 10.0).unwrap();
        let f = uniform_field(&grid, 0.7);
        let mut acc = PhaseAccumulator::new(8);
        acc.start(&f, 1.0);
        for &t in &[1.5, 2.0, 4.0, 7.0] {
            acc.update(&f, t).unwrap();
        }
        let want = 0.49 * 7f64.ln();
        for idx in 0..8 {
            assert!((acc.integral(idx) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn accumulator_matches_inverse_time_oracle() {
        // |f_hat|^2 = 1/s gives int_1^t ds/s^2 = 1 - 1/t; trapezoid in log s
        // converges at second order in the log step
        let grid = make_grid(4, 10.0).unwrap();
        let run = |updates: usize| -> f64 {
            let mut acc = PhaseAccumulator::new(4);
            let f = uniform_field(&grid, 1.0);
            acc.start(&f, 1.0);
            for i in 1..=updates {
                let t = 10f64.powf(i as f64 / updates as f64);
                let f = uniform_field(&grid, (1.0 / t).sqrt());
                acc.update(&f, t).unwrap();
            }
            acc.integral(0)
        };
        let want = 0.9;
        let coarse = (run(100) - want).abs();
        let fine = (run(1000) - want).abs();
        assert!(coarse < 5e-5, "coarse error {coarse}");
        assert!(fine < 5e-7, "fine error {fine}");
    }

    #[test]
    fn accumulator_rejects_time_reversal() {
        let grid = make_grid(4, 10.0).unwrap();
        let f = uniform_field(&grid, 1.0);
        let mut acc = PhaseAccumulator::new(4);
        acc.start(&f, 2.0);
        assert!(acc.update(&f, 1.5).is_err());
        assert!(acc.update(&f, 2.0).is_ok());
    }

    #[test]
    fn phase_correction_spot_values() {
        let a = 0.37;
        assert!((phase_correction(1.0, a, &kdv(Sign::Focusing)) - 4.0 * a / 3.0).abs() < 1e-15);
        assert!((phase_correction(-1.0, a, &kdv(Sign::Focusing)) + 4.0 * a / 3.0).abs() < 1e-15);
        assert!((phase_correction(-1.0, a, &nls(Sign::Focusing)) + 4.0 * a / 3.0).abs() < 1e-15);
        assert!((phase_correction(1.0, a, &nls(Sign::Focusing)) + 4.0 * a / 3.0).abs() < 1e-15);
    }

    #[test]
    fn phase_correction_flips_with_nonlinearity_sign() {
        for xi in [-2.0, 0.5, 3.7] {
            let plus = phase_correction(xi, 1.3, &kdv(Sign::Focusing));
            let minus = phase_correction(xi, 1.3, &kdv(Sign::Defocusing));
            assert_eq!(plus, -minus);
        }
    }

    #[test]
    fn corrected_profile_reduces_to_weighted_profile_at_start() {
        let grid = make_grid(64, 30.0).unwrap();
        let samples: Vec<f64> = grid.xs().iter().map(|&x| (-x * x / 4.0).exp()).collect();
        let f = to_spectral_real(&samples, &grid).unwrap();
        let acc = {
            let mut a = PhaseAccumulator::new(64);
            a.start(&f, 1.0);
            a
        };
        let spec = kdv(Sign::Focusing);
        let w = corrected_profile(&f, 1.0, &acc, &spec).unwrap();
        for idx in 0..64 {
            let want = f.coeffs()[idx] * z_weight(0.5, grid.xi(idx));
            assert!((w.values.coeffs()[idx] - want).norm() < 1e-15);
        }
    }

    #[test]
    fn drift_report_is_zero_for_self_consistent_rotation() {
        // f_hat = A e^{-i theta(acc)} with acc from its own constant modulus:
        // the corrected angle is identically zero
        let spec = kdv(Sign::Focusing);
        let xi0 = 1.0;
        let amp = 0.3;
        let samples: Vec<PhaseSample> = (0..40)
            .map(|i| {
                let t = 10f64.powf(i as f64 / 39.0 * 2.0);
                let acc = amp * amp * t.ln();
                let theta = phase_correction(xi0, acc, &spec);
                PhaseSample {
                    t,
                    fhat: Complex64::new(theta.cos(), -theta.sin()) * amp,
                    acc,
                }
            })
            .collect();
        let report = phase_drift_report(xi0, &samples, &spec).unwrap();
        assert!(report.tv_raw > 0.01, "raw drift {}", report.tv_raw);
        assert!(report.tv_corrected < 1e-12, "corrected {}", report.tv_corrected);
        assert!(report.ratio < 1e-10);
    }

    #[test]
    fn unwrap_handles_winding() {
        let true_phase: Vec<f64> = (0..50).map(|i| 0.4 * i as f64).collect();
        let wrapped: Vec<f64> = true_phase
            .iter()
            .map(|&p| {
                let mut w = p;
                while w > PI {
                    w -= 2.0 * PI;
                }
                w
            })
            .collect();
        let un = unwrap_angles(&wrapped);
        for (u, p) in un.iter().zip(&true_phase) {
            assert!((u - p).abs() < 1e-12);
        }
    }

    #[test]
    fn convergence_report_zero_for_constant_series() {
        let grid = make_grid(16, 10.0).unwrap();
        let f = uniform_field(&grid, 0.5);
        let ws: Vec<CorrectedProfile> = [2.0, 4.0, 8.0, 16.0]
            .iter()
            .map(|&t| CorrectedProfile {
                t,
                values: f.clone(),
            })
            .collect();
        let rep = convergence_report(&ws, 5e-4).unwrap();
        assert!(rep.diffs.iter().all(|&d| d == 0.0));
        assert!(rep.slope_ok);
    }

    #[test]
    fn convergence_report_measures_power_decay() {
        let grid = make_grid(16, 10.0).unwrap();
        // w(t) with |w(2t) - w(t)| ~ t^{-1/4}
        let ws: Vec<CorrectedProfile> = (0..8)
            .map(|i| {
                let t = 2f64.powi(i + 1);
                CorrectedProfile {
                    t,
                    values: uniform_field(&grid, -4.0 * t.powf(-0.25)),
                }
            })
            .collect();
        let rep = convergence_report(&ws, 5e-4).unwrap();
        assert!(rep.tail_strictly_decreasing(4));
        assert!((rep.slope - -0.25).abs() < 0.02, "slope {}", rep.slope);
        assert!(rep.slope_ok);
    }

    #[test]
    fn decay_fit_recovers_exact_power_laws() {
        let series: Vec<(f64, f64)> = (0..12)
            .map(|i| {
                let t = 2f64.powi(i);
                (t, 3.0 * t.powf(-0.5))
            })
            .collect();
        let fit = decay_fit(&series, (1.0, 1e5)).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-12);
        assert!(fit.stderr < 1e-12);
        let flat: Vec<(f64, f64)> = series.iter().map(|&(t, _)| (t, 2.5)).collect();
        let fit = decay_fit(&flat, (1.0, 1e5)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn decay_fit_rejects_short_windows() {
        let series: Vec<(f64, f64)> = (0..12).map(|i| (1.0 + i as f64 * 0.1, 1.0)).collect();
        assert!(decay_fit(&series, (1.0, 3.0)).is_err());
    }

    #[test]
    fn model_transform_matches_quadrature() {
        for &w in &[0.3, 1.0, 2.0, 5.0, 11.7] {
            let direct = adaptive_real(
                &|u: f64| phi(u) * (u * w).cos(),
                -2.0,
                2.0,
                1e-13,
                2000,
            );
            assert!(
                (model_g(w) - direct.value).abs() < 1e-12,
                "w = {w}: {} vs {}",
                model_g(w),
                direct.value
            );
        }
        // removable points against the series fallbacks
        assert!((model_g(1e-9) - 3.0).abs() < 1e-12);
        assert!((model_g(PI) + 0.5).abs() < 1e-12);
        assert!((model_g(-PI) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn model_check_small_n_matches_direct_quadrature() {
        // the 2-D integral collapses to N^2 int phi(x) g(N^2 x) dx
        for (n, frozen) in [(2.0, 6.289641633784583), (5.0, 6.2831742575779339)] {
            let n2 = n * n;
            let direct = adaptive_real(
                &|x: f64| phi(x) * model_g(n2 * x),
                -2.0,
                2.0,
                1e-13,
                8000,
            );
            let value = stationary_phase_model_check(n).unwrap();
            assert!(
                (n2 * direct.value - value).abs() < 1e-11,
                "N = {n}: direct {} vs deviation form {value}",
                n2 * direct.value
            );
            assert!((value - frozen).abs() < 1e-11, "N = {n}: {value} vs {frozen}");
        }
    }

    #[test]
    fn model_deviation_frozen_values_and_envelope() {
        // reference deviations from the sine and cosine integral closed form
        // of the tail at 60 digit precision; the true values at N = 400
        // (-4.128e-26) and N = 1600 (5.911e-31) sit below the float64
        // summation noise of the panel sweep, so only a noise envelope is
        // asserted there
        let pinned = [(25.0, 7.5176010224698e-13, 1e-7), (100.0, 7.2474388095649e-19, 5e-4)];
        let mut prev = f64::INFINITY;
        for (n, frozen, rtol) in pinned {
            let dev = stationary_phase_model_deviation(n).unwrap().abs();
            assert!(
                (dev - frozen).abs() <= rtol * frozen,
                "N = {n}: dev {dev:e} vs reference {frozen:e}"
            );
            assert!(dev < prev, "error not decreasing at N = {n}");
            prev = dev;
        }
        for (n, ceiling) in [(400.0, 2e-24), (1600.0, 1e-25)] {
            let dev = stationary_phase_model_deviation(n).unwrap().abs();
            assert!(dev < ceiling, "N = {n}: dev {dev:e} above noise envelope");
            assert!(dev < prev, "error not decreasing at N = {n}");
            prev = dev;
        }
    }

    #[test]
    fn resonance_window_dyadic_values() {
        assert_eq!(resonance_window(1.0, 1e4, -0.6), 2f64.powi(-6));
        assert_eq!(resonance_window(1.0, 1e5, -0.6), 2f64.powi(-7));
        assert_eq!(resonance_window(1.0, 1e3, 0.5), 2f64.powi(-4));
        assert_eq!(resonance_window(1.0, 1e4, 0.5), 2f64.powi(-6));
    }

    #[test]
    fn resonant_check_frozen_flat_profile_cells() {
        let flat = |_: f64| Complex64::new(1.0, 0.0);
        let spec = EquationSpec::new(EquationKind::Fkdv, -0.6, Sign::Focusing).unwrap();
        let r1 = resonant_asymptotic_check(&flat, 1.0, 1e4, &spec).unwrap();
        assert!(
            (r1.deviation - 0.2464328772).abs() < 5e-7,
            "dev {}",
            r1.deviation
        );
        assert!((r1.j_re - 1.9728341159e-3).abs() < 1e-9);
        assert!((r1.asym_re - 2.6179938780e-3).abs() < 1e-12);
        let r2 = resonant_asymptotic_check(&flat, 1.0, 1e5, &spec).unwrap();
        assert!(
            (r2.deviation - 0.1380172856).abs() < 5e-7,
            "dev {}",
            r2.deviation
        );
        let ratio = r2.deviation / r1.deviation;
        assert!((0.35..=0.65).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn resonant_check_alpha_half_cells_and_fnls_identity() {
        let flat = |_: f64| Complex64::new(1.0, 0.0);
        let kdv = EquationSpec::new(EquationKind::Fkdv, 0.5, Sign::Focusing).unwrap();
        let r = resonant_asymptotic_check(&flat, 1.0, 1e3, &kdv).unwrap();
        assert!((r.deviation - 0.0355444642).abs() < 5e-7, "dev {}", r.deviation);
        assert!((r.asym_re - 8.3775804096e-3).abs() < 1e-12);
        // on a positive band the fNLS dispersion differs only by overall sign,
        // so the deviation agrees
        let nls = EquationSpec::new(EquationKind::Fnls, 0.5, Sign::Focusing).unwrap();
        let rn = resonant_asymptotic_check(&flat, 1.0, 1e3, &nls).unwrap();
        assert!(
            (rn.deviation - r.deviation).abs() < 1e-8,
            "{} vs {}",
            rn.deviation,
            r.deviation
        );
        let r4 = resonant_asymptotic_check(&flat, 1.0, 1e4, &kdv).unwrap();
        assert!((r4.deviation - 0.0871411748).abs() < 5e-7, "dev {}", r4.deviation);
    }

    #[test]
    fn resonant_check_zero_profile() {
        let zero = |_: f64| Complex64::new(0.0, 0.0);
        let spec = kdv(Sign::Focusing);
        let r = resonant_asymptotic_check(&zero, 1.0, 1e3, &spec).unwrap();
        assert_eq!(r.j_re, 0.0);
        assert_eq!(r.asym_re, 0.0);
        assert_eq!(r.deviation, 0.0);
    }

    #[test]
    fn inequality_spot_values() {
        let r = phase_ratio(0.5, 1.0, 1.0, 1.0);
        assert!((r - (3.0 * 3f64.sqrt() - 3.0)).abs() < 1e-12);
        assert!((r - 2.196152422706632).abs() < 1e-12);
        let r = phase_ratio(-0.5, 1.0, 1.0, 1.0);
        assert!((r - (3.0 - 3f64.sqrt())).abs() < 1e-12);
        assert!((r - 1.2679491924311228).abs() < 1e-12);
    }

    #[test]
    fn inequality_sampling_positive_and_seed_stable() {
        for alpha in [-0.5, 0.5] {
            let a = phase_inequality_check(alpha, 20_000, 7).unwrap();
            let b = phase_inequality_check(alpha, 20_000, 7).unwrap();
            let c = phase_inequality_check(alpha, 20_000, 8).unwrap();
            assert!(a.min_ratio > 0.0, "alpha {alpha}: min {}", a.min_ratio);
            assert_eq!(a.min_ratio, b.min_ratio);
            assert!(c.min_ratio > 0.0);
        }
    }

    proptest! {
        #[test]
        fn prop_accumulator_nondecreasing(amps in proptest::collection::vec(0.0f64..2.0, 2..20)) {
            let grid = make_grid(4, 10.0).unwrap();
            let mut acc = PhaseAccumulator::new(4);
            acc.start(&uniform_field(&grid, 1.0), 1.0);
            let mut t = 1.0;
            let mut prev = acc.integral(0);
            for a in amps {
                t *= 1.5;
                acc.update(&uniform_field(&grid, a), t).unwrap();
                let cur = acc.integral(0);
                prop_assert!(cur >= prev);
                prop_assert!(cur >= 0.0);
                prev = cur;
            }
        }

        #[test]
        fn prop_correction_is_unimodular(re in -2.0f64..2.0, im in -2.0f64..2.0, acc_val in 0.0f64..5.0) {
            let grid = make_grid(8, 10.0).unwrap();
            let spec = EquationSpec::new(EquationKind::Fkdv, 0.5, Sign::Focusing).unwrap();
            let mut f = SpectralField::zero(&grid);
            for c in f.coeffs_mut() {
                *c = Complex64::new(re, im);
            }
            let forced = PhaseAccumulator::from_parts(
                2.0,
                vec![acc_val; 8],
                vec![re * re + im * im; 8],
            ).unwrap();
            let w = corrected_profile(&f, 2.0, &forced, &spec).unwrap();
            for idx in 0..8 {
                let lhs = w.values.coeffs()[idx].norm();
                let rhs = z_weight(0.5, grid.xi(idx)) * f.coeffs()[idx].norm();
                prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.max(1e-300));
            }
        }

        #[test]
        fn prop_inequality_positive_on_ordered_triples(
            la in -4.0f64..4.0, lb in -4.0f64..4.0, lc in -4.0f64..4.0,
            alpha in proptest::sample::select(vec![-0.9, -0.5, -0.1, 0.1, 0.5, 0.9]),
        ) {
            let mut v = [10f64.powf(la), 10f64.powf(lb), 10f64.powf(lc)];
            v.sort_by(|p, q| q.total_cmp(p));
            prop_assert!(phase_ratio(alpha, v[0], v[1], v[2]) > 0.0);
        }
    }
}
