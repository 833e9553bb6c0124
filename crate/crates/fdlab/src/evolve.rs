//! Time integration in the profile frame.
//!
//! The state is the profile `f_hat(t) = exp(-i t Lambda) u_hat(t)`, which
//! removes the stiff linear flow exactly; what remains is the slowly varying
//! cubic term, integrated by classic RK4 with step-doubling error control.
//! Products are formed pointwise in x and the result is truncated to the
//! inner half of the frequency lattice (`|j| <= n/4`), so the cubic
//! convolution is alias-free and the truncated system conserves mass and
//! Hamiltonian exactly.

use crate::equation::{EquationKind, EquationSpec};
use crate::field::{to_physical, to_spectral, SpectralField};
use crate::grid::Grid;
use crate::norms::{compute_norm, NormKind};
use crate::scatter::PhaseAccumulator;
use crate::{validate, Complex64, Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct EvolutionState {
    pub t: f64,
    pub profile: SpectralField,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Trip the blow-up monitor when `|u|_inf` exceeds this multiple of its
    /// initial value.
    pub blowup_factor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            dt_init: 1e-2,
            dt_min: 1e-8,
            dt_max: 0.5,
            rtol: 1e-9,
            atol: 1e-12,
            blowup_factor: 1e3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        validate(
            self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= self.dt_max,
            format!(
                "need 0 < dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            ),
        )?;
        validate(
            self.rtol > 0.0 && self.atol >= 0.0,
            "tolerances must be positive",
        )
    }
}

/// One diagnostics row; the fields mirror the series CSV columns.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub hamiltonian: f64,
    pub linf_u: f64,
    pub linf_ux: f64,
    pub h_n0: f64,
    pub h11: f64,
    pub z_norm: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupReason {
    SupNormGrowth,
    StepSizeUnderflow,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BlowupReport {
    pub t_star: f64,
    pub reason: BlowupReason,
}

// ---------------------------------------------------------------------------
// initial data

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum InitialData {
    /// `u0(x) = eps * exp(-(x/width)^2)`.
    Gaussian { eps: f64, width: f64 },
    /// Real even field whose coefficients are a raised-cosine annulus bump
    /// at dyadic scale `2^k`, of height `eps`.
    BandBump { eps: f64, k: i32 },
    /// Explicit samples (interleaved re, im pairs when deserialized).
    Samples { values: Vec<(f64, f64)> },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmallnessReport {
    pub h_n0: f64,
    pub h11: f64,
    pub z_norm: f64,
    /// Sum of the three norms, the quantity required to be small.
    pub eps0: f64,
}

pub fn make_initial_data(
    data: &InitialData,
    grid: &Grid,
    spec: &EquationSpec,
) -> Result<(Vec<Complex64>, SmallnessReport)> {
    let samples: Vec<Complex64> = match data {
        InitialData::Gaussian { eps, width } => {
            validate(
                eps.is_finite() && *eps >= 0.0,
                format!("gaussian amplitude {eps} must be non-negative"),
            )?;
            validate(
                width.is_finite() && *width > 0.0,
                format!("gaussian width {width} must be positive"),
            )?;
            grid.xs()
                .iter()
                .map(|&x| Complex64::new(eps * (-(x / width) * (x / width)).exp(), 0.0))
                .collect()
        }
        InitialData::BandBump { eps, k } => {
            validate(
                eps.is_finite() && *eps >= 0.0,
                format!("bump amplitude {eps} must be non-negative"),
            )?;
            let mut f = SpectralField::zero(grid);
            for idx in 0..grid.n() {
                let v = eps * crate::cutoff::psi_k(grid.xi(idx), *k);
                f.coeffs_mut()[idx] = Complex64::new(v, 0.0);
            }
            to_physical(&f)
        }
        InitialData::Samples { values } => values
            .iter()
            .map(|&(re, im)| Complex64::new(re, im))
            .collect(),
    };
    validate(
        samples.len() == grid.n(),
        format!(
            "initial data has {} samples, grid wants {}",
            samples.len(),
            grid.n()
        ),
    )?;
    let f = to_spectral(&samples, grid)?;
    let report = SmallnessReport {
        h_n0: compute_norm(&f, NormKind::Hn0),
        h11: compute_norm(&f, NormKind::H11),
        z_norm: compute_norm(&f, NormKind::Z(spec.alpha)),
        eps0: 0.0,
    };
    let report = SmallnessReport {
        eps0: report.h_n0 + report.h11 + report.z_norm,
        ..report
    };
    Ok((samples, report))
}

// ---------------------------------------------------------------------------
// right-hand side

/// Zero all modes outside `|j| <= n/4`. With cubic products this makes the
/// pseudospectral convolution exact on the retained band.
pub fn dealias(field: &mut SpectralField) {
    let n = field.grid().n();
    let cut = (n / 4) as i64;
    // strictly below n/4: triple products of retained modes then fold only
    // onto zeroed modes, so the retained band stays alias-free
    for idx in 0..n {
        let j = field.grid().mode(idx);
        if j.abs() >= cut {
            field.coeffs_mut()[idx] = Complex64::new(0.0, 0.0);
        }
    }
}

fn phases(grid: &Grid, spec: &EquationSpec, t: f64) -> Vec<Complex64> {
    (0..grid.n())
        .map(|idx| {
            let th = spec.linear_phase(grid.xi(idx), t);
            Complex64::new(th.cos(), th.sin())
        })
        .collect()
}

/// Profile-frame time derivative of `f_hat` at the state's time.
///
/// fKdV: `d/dt f_hat = -s (i xi / 3) e^{-i t Lambda} Fx[u^3]`
/// fNLS: `d/dt f_hat = +i s e^{-i t Lambda} Fx[|u|^2 u]`
/// where `u` is the physical field of `e^{i t Lambda} f_hat` and `s` is the
/// nonlinearity sign.
pub fn nonlinear_term(state: &EvolutionState, spec: &EquationSpec) -> Result<SpectralField> {
    let grid = state.profile.grid().clone();
    let ph = phases(&grid, spec, state.t);
    let mut uhat = state.profile.clone();
    for (c, p) in uhat.coeffs_mut().iter_mut().zip(ph.iter()) {
        *c *= p;
    }
    let u = to_physical(&uhat);
    let cubic: Vec<Complex64> = match spec.kind {
        EquationKind::Fkdv => u.iter().map(|&z| z * z * z).collect(),
        EquationKind::Fnls => u.iter().map(|&z| z * z.norm_sqr()).collect(),
    };
    let mut what = to_spectral(&cubic, &grid)?;
    let s = spec.sign.as_f64();
    for idx in 0..grid.n() {
        let factor = match spec.kind {
            EquationKind::Fkdv => Complex64::new(0.0, -s * grid.xi(idx) / 3.0),
            EquationKind::Fnls => Complex64::new(0.0, s),
        };
        what.coeffs_mut()[idx] *= factor * ph[idx].conj();
    }
    dealias(&mut what);
    Ok(what)
}

/// Direct-summation version of `nonlinear_term` (exact convolution over the
/// retained band, no FFT). Quadratic cost per output mode; test sizes only.
pub fn nonlinear_term_reference(state: &EvolutionState, spec: &EquationSpec) -> SpectralField {
    let grid = state.profile.grid().clone();
    let n = grid.n() as i64;
    let keep = n / 4 - 1;
    let s = spec.sign.as_f64();
    let uhat: Vec<Complex64> = (0..grid.n())
        .map(|idx| {
            let th = spec.linear_phase(grid.xi(idx), state.t);
            state.profile.coeffs()[idx] * Complex64::new(th.cos(), th.sin())
        })
        .collect();
    let at = |j: i64| -> Complex64 {
        match grid.index_of_mode(j) {
            Some(idx) => uhat[idx],
            None => Complex64::new(0.0, 0.0),
        }
    };
    let norm = grid.dxi() * grid.dxi() / (2.0 * std::f64::consts::PI);
    let mut out = SpectralField::zero(&grid);
    for jj in -keep..=keep {
        let mut acc = Complex64::new(0.0, 0.0);
        match spec.kind {
            EquationKind::Fkdv => {
                // sum over j1 + j2 + j3 = jj of u1 u2 u3
                for j1 in -keep..=keep {
                    for j2 in -keep..=keep {
                        let j3 = jj - j1 - j2;
                        if j3.abs() <= keep {
                            acc += at(j1) * at(j2) * at(j3);
                        }
                    }
                }
            }
            EquationKind::Fnls => {
                // sum over j1 + j2 - j3 = jj of u1 u2 conj(u3)
                for j1 in -keep..=keep {
                    for j2 in -keep..=keep {
                        let j3 = j1 + j2 - jj;
                        if j3.abs() <= keep {
                            acc += at(j1) * at(j2) * at(j3).conj();
                        }
                    }
                }
            }
        }
        let idx = grid.index_of_mode(jj).unwrap();
        let xi = grid.xi(idx);
        let factor = match spec.kind {
            EquationKind::Fkdv => Complex64::new(0.0, -s * xi / 3.0),
            EquationKind::Fnls => Complex64::new(0.0, s),
        };
        let th = spec.linear_phase(xi, state.t);
        let back = Complex64::new(th.cos(), -th.sin());
        out.coeffs_mut()[idx] = acc * norm * factor * back;
    }
    out
}

// ---------------------------------------------------------------------------
// stepping

fn axpy(y: &SpectralField, a: f64, x: &SpectralField) -> SpectralField {
    let mut out = y.clone();
    for (o, v) in out.coeffs_mut().iter_mut().zip(x.coeffs()) {
        *o += v * a;
    }
    out
}

fn l2_of(coeffs: &[Complex64], dxi: f64) -> f64 {
    (coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * dxi).sqrt()
}

fn rk4_once(state: &EvolutionState, dt: f64, spec: &EquationSpec) -> Result<SpectralField> {
    let y = &state.profile;
    let k1 = nonlinear_term(state, spec)?;
    let mid1 = EvolutionState {
        t: state.t + 0.5 * dt,
        profile: axpy(y, 0.5 * dt, &k1),
    };
    let k2 = nonlinear_term(&mid1, spec)?;
    let mid2 = EvolutionState {
        t: state.t + 0.5 * dt,
        profile: axpy(y, 0.5 * dt, &k2),
    };
    let k3 = nonlinear_term(&mid2, spec)?;
    let end = EvolutionState {
        t: state.t + dt,
        profile: axpy(y, dt, &k3),
    };
    let k4 = nonlinear_term(&end, spec)?;
    let mut out = y.clone();
    let c = dt / 6.0;
    for i in 0..out.coeffs().len() {
        let incr = k1.coeffs()[i] + (k2.coeffs()[i] + k3.coeffs()[i]) * 2.0 + k4.coeffs()[i];
        out.coeffs_mut()[i] += incr * c;
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: EvolutionState,
    pub dt_used: f64,
    pub dt_next: f64,
    pub error_estimate: f64,
    pub rejections: usize,
}

/// Advance one accepted step of size at most `dt_cap`, using step doubling
/// (one full step vs two halves, error from the Richardson difference, the
/// fine solution is propagated).
pub fn step(
    state: &EvolutionState,
    dt_try: f64,
    dt_cap: f64,
    spec: &EquationSpec,
    cfg: &SolverConfig,
) -> Result<StepOutcome> {
    let dxi = state.profile.grid().dxi();
    let mut dt = dt_try.min(dt_cap).min(cfg.dt_max);
    let mut rejections = 0;
    loop {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Numerical(format!("step size {dt} at t = {}", state.t)));
        }
        let trial = (|| {
            let coarse = rk4_once(state, dt, spec)?;
            let half = rk4_once(state, 0.5 * dt, spec)?;
            let mid = EvolutionState {
                t: state.t + 0.5 * dt,
                profile: half,
            };
            Ok((coarse, rk4_once(&mid, 0.5 * dt, spec)?))
        })();
        let (coarse, fine) = match trial {
            Ok(pair) => pair,
            // a trial that leaves the finite range is an infinite error
            // estimate, not a caller mistake: shrink and retry
            Err(Error::Validation(msg)) if msg.contains("non-finite") => {
                rejections += 1;
                dt *= 0.1;
                if dt < cfg.dt_min {
                    return Err(Error::Numerical(format!(
                        "step size underflow at t = {} (trial step left the finite range)",
                        state.t
                    )));
                }
                continue;
            }
            Err(e) => return Err(e),
        };
        let diff: Vec<Complex64> = fine
            .coeffs()
            .iter()
            .zip(coarse.coeffs())
            .map(|(a, b)| a - b)
            .collect();
        let err = l2_of(&diff, dxi) / 15.0;
        let tol = cfg.atol + cfg.rtol * l2_of(fine.coeffs(), dxi);
        // a non-finite err fails this comparison and falls through to the
        // shrink branch, whose max(0.1) ignores the NaN
        if err <= tol {
            let grow = if err == 0.0 {
                5.0
            } else {
                (0.9 * (tol / err).powf(0.2)).min(5.0)
            };
            let dt_next = (dt * grow).clamp(cfg.dt_min, cfg.dt_max);
            return Ok(StepOutcome {
                state: EvolutionState {
                    t: state.t + dt,
                    profile: fine,
                },
                dt_used: dt,
                dt_next,
                error_estimate: err,
                rejections,
            });
        }
        rejections += 1;
        let shrink = (0.9 * (tol / err).powf(0.2)).max(0.1);
        dt *= shrink;
        if dt < cfg.dt_min {
            return Err(Error::Numerical(format!(
                "step size underflow at t = {} (needed {dt:.3e})",
                state.t
            )));
        }
    }
}

// ---------------------------------------------------------------------------
// conserved quantities and monitors

/// Mass and Hamiltonian of the field whose profile is `state.profile`.
///
/// fKdV: `H = 1/2 int ||D|^{alpha/2} u|^2 - s/12 int u^4`
/// fNLS: `H = 1/2 int ||D|^{(alpha+1)/2} u|^2 - s/4 int |u|^4`
pub fn conserved_quantities(state: &EvolutionState, spec: &EquationSpec) -> (f64, f64) {
    let grid = state.profile.grid();
    let dxi = grid.dxi();
    let mass: f64 = state
        .profile
        .coeffs()
        .iter()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        * dxi;
    let mut quadratic = 0.0;
    for (idx, c) in state.profile.coeffs().iter().enumerate() {
        quadratic += spec.elliptic_symbol(grid.xi(idx)) * c.norm_sqr();
    }
    quadratic *= dxi;
    let u = physical_field(state, spec);
    let s = spec.sign.as_f64();
    let quartic: f64 = u.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum::<f64>() * grid.dx();
    let hamiltonian = match spec.kind {
        EquationKind::Fkdv => 0.5 * quadratic - s / 12.0 * quartic,
        EquationKind::Fnls => 0.5 * quadratic - s / 4.0 * quartic,
    };
    (mass, hamiltonian)
}

/// Physical samples of `u(t)` reconstructed from the profile.
pub fn physical_field(state: &EvolutionState, spec: &EquationSpec) -> Vec<Complex64> {
    let grid = state.profile.grid();
    let mut uhat = state.profile.clone();
    let ph = phases(grid, spec, state.t);
    for (c, p) in uhat.coeffs_mut().iter_mut().zip(ph.iter()) {
        *c *= p;
    }
    to_physical(&uhat)
}

pub fn diagnostics(state: &EvolutionState, spec: &EquationSpec) -> DiagnosticsRecord {
    let grid = state.profile.grid().clone();
    let (mass, hamiltonian) = conserved_quantities(state, spec);
    let mut uhat = state.profile.clone();
    let ph = phases(&grid, spec, state.t);
    for (c, p) in uhat.coeffs_mut().iter_mut().zip(ph.iter()) {
        *c *= p;
    }
    let u = to_physical(&uhat);
    let ux = to_physical(&uhat.derivative());
    DiagnosticsRecord {
        t: state.t,
        mass,
        hamiltonian,
        linf_u: u.iter().map(|z| z.norm()).fold(0.0, f64::max),
        linf_ux: ux.iter().map(|z| z.norm()).fold(0.0, f64::max),
        h_n0: compute_norm(&uhat, NormKind::Hn0),
        h11: compute_norm(&uhat, NormKind::H11),
        z_norm: compute_norm(&state.profile, NormKind::Z(spec.alpha)),
    }
}

/// Check the running state against the blow-up heuristics.
pub fn blowup_monitor(
    state: &EvolutionState,
    spec: &EquationSpec,
    initial_linf: f64,
    cfg: &SolverConfig,
) -> Option<BlowupReport> {
    let u = physical_field(state, spec);
    let linf = u.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !linf.is_finite() || linf > cfg.blowup_factor * initial_linf {
        Some(BlowupReport {
            t_star: state.t,
            reason: BlowupReason::SupNormGrowth,
        })
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// the run loop

#[derive(Clone, Debug)]
pub struct RunPlan {
    pub t0: f64,
    pub t_end: f64,
    /// Times at which a diagnostics row is recorded (t0 and t_end are always
    /// included).
    pub sample_times: Vec<f64>,
    /// Times at which the full profile and accumulator are kept in memory.
    pub capture_times: Vec<f64>,
    /// Modes whose per-frequency history is recorded at sample times.
    pub tracked_modes: Vec<i64>,
}

#[derive(Clone, Debug)]
pub struct ProfileCapture {
    pub t: f64,
    pub profile: SpectralField,
    pub accumulator: PhaseAccumulator,
    /// Step size the controller would take next; persisting it makes a
    /// resumed run reproduce the uninterrupted step sequence exactly.
    pub next_dt: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PerXiRecord {
    pub t: f64,
    pub xi: f64,
    pub abs_fhat: f64,
    pub arg_fhat: f64,
    pub acc: f64,
    pub phase: f64,
    pub w_re: f64,
    pub w_im: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub captures: Vec<ProfileCapture>,
    pub per_xi: Vec<PerXiRecord>,
    pub final_state: EvolutionState,
    pub accumulator: PhaseAccumulator,
    pub next_dt: f64,
    pub blowup: Option<BlowupReport>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

pub fn initial_state(
    u0: &[Complex64],
    grid: &Grid,
    spec: &EquationSpec,
    t0: f64,
) -> Result<EvolutionState> {
    let mut profile = to_spectral(u0, grid)?;
    // the data is taken as given at t0, so the profile at t0 carries the
    // backward free flow
    let ph = phases(grid, spec, t0);
    for (c, p) in profile.coeffs_mut().iter_mut().zip(ph.iter()) {
        *c *= p.conj();
    }
    dealias(&mut profile);
    Ok(EvolutionState { t: t0, profile })
}

/// Integrate from a prepared state (fresh or resumed). Event times (samples,
/// captures, the accumulator start at t = 1, t_end) are hit exactly.
#[allow(clippy::too_many_arguments)]
pub fn run_from(
    state: EvolutionState,
    accumulator: Option<PhaseAccumulator>,
    dt_start: f64,
    spec: &EquationSpec,
    plan: &RunPlan,
    cfg: &SolverConfig,
    mut observer: Option<&mut dyn FnMut(&EvolutionState, &DiagnosticsRecord)>,
) -> Result<Trajectory> {
    spec.validate()?;
    cfg.validate()?;
    validate(
        plan.t_end > state.t,
        format!("t_end {} not after start {}", plan.t_end, state.t),
    )?;

    let grid = state.profile.grid().clone();
    let tracked: Vec<usize> = plan
        .tracked_modes
        .iter()
        .filter_map(|&j| grid.index_of_mode(j))
        .collect();

    // event schedule
    let mut events: Vec<f64> = Vec::new();
    events.extend(plan.sample_times.iter().copied());
    events.extend(plan.capture_times.iter().copied());
    if state.t < 1.0 && plan.t_end > 1.0 {
        events.push(1.0);
    }
    events.push(plan.t_end);
    events.retain(|&t| t > state.t && t <= plan.t_end);
    events.sort_by(f64::total_cmp);
    events.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));

    let is_at = |t: f64, list: &[f64]| {
        list.iter()
            .any(|&s| (s - t).abs() <= 1e-12 * t.abs().max(1.0))
    };

    let mut acc = accumulator.unwrap_or_else(|| PhaseAccumulator::new(grid.n()));
    let mut traj = Trajectory {
        records: Vec::new(),
        captures: Vec::new(),
        per_xi: Vec::new(),
        final_state: state.clone(),
        accumulator: acc.clone(),
        next_dt: dt_start,
        blowup: None,
        steps_accepted: 0,
        steps_rejected: 0,
    };

    let initial_linf = {
        let u = physical_field(&state, spec);
        u.iter().map(|z| z.norm()).fold(0.0, f64::max)
    };

    let emit = |state: &EvolutionState,
                    acc: &PhaseAccumulator,
                    traj: &mut Trajectory,
                    observer: &mut Option<&mut dyn FnMut(&EvolutionState, &DiagnosticsRecord)>| {
        let rec = diagnostics(state, spec);
        if let Some(cb) = observer.as_mut() {
            cb(state, &rec);
        }
        for &idx in &tracked {
            let xi = grid.xi(idx);
            let c = state.profile.coeffs()[idx];
            let a = acc.integral(idx);
            let theta = crate::scatter::phase_correction(xi, a, spec);
            let w = Complex64::new(theta.cos(), theta.sin())
                * c
                * crate::norms::z_weight(spec.alpha, xi);
            traj.per_xi.push(PerXiRecord {
                t: state.t,
                xi,
                abs_fhat: c.norm(),
                arg_fhat: c.arg(),
                acc: a,
                phase: theta,
                w_re: w.re,
                w_im: w.im,
            });
        }
        traj.records.push(rec);
    };

    // initial bookkeeping
    if state.t >= 1.0 && !acc.started() {
        acc.start(&state.profile, state.t);
    }
    emit(&state, &acc, &mut traj, &mut observer);
    if is_at(state.t, &plan.capture_times) {
        traj.captures.push(ProfileCapture {
            t: state.t,
            profile: state.profile.clone(),
            accumulator: acc.clone(),
            next_dt: dt_start,
        });
    }

    let mut current = state;
    let mut dt_next = dt_start.clamp(cfg.dt_min, cfg.dt_max);
    let mut event_iter = events.into_iter().peekable();

    while let Some(&t_event) = event_iter.peek() {
        // march to this event
        while current.t < t_event {
            let room = t_event - current.t;
            let outcome = match step(&current, dt_next, room, spec, cfg) {
                Ok(o) => o,
                Err(Error::Numerical(msg)) if msg.contains("underflow") => {
                    traj.blowup = Some(BlowupReport {
                        t_star: current.t,
                        reason: BlowupReason::StepSizeUnderflow,
                    });
                    traj.final_state = current;
                    traj.accumulator = acc;
                    traj.next_dt = dt_next;
                    return Ok(traj);
                }
                Err(e) => return Err(e),
            };
            traj.steps_accepted += 1;
            traj.steps_rejected += outcome.rejections;
            current = outcome.state;
            dt_next = outcome.dt_next;
            if current.t >= 1.0 {
                if !acc.started() {
                    acc.start(&current.profile, current.t);
                } else {
                    acc.update(&current.profile, current.t)?;
                }
            }
            if let Some(report) = blowup_monitor(&current, spec, initial_linf, cfg) {
                traj.blowup = Some(report);
                emit(&current, &acc, &mut traj, &mut observer);
                traj.final_state = current;
                traj.accumulator = acc;
                traj.next_dt = dt_next;
                return Ok(traj);
            }
        }
        // at the event now
        if is_at(current.t, &plan.sample_times) || (current.t - plan.t_end).abs() < 1e-12 {
            emit(&current, &acc, &mut traj, &mut observer);
        }
        if is_at(current.t, &plan.capture_times) {
            traj.captures.push(ProfileCapture {
                t: current.t,
                profile: current.profile.clone(),
                accumulator: acc.clone(),
                next_dt: dt_next,
            });
        }
        event_iter.next();
    }

    traj.final_state = current;
    traj.accumulator = acc;
    traj.next_dt = dt_next;
    Ok(traj)
}

/// Convenience wrapper: build the state from physical data and integrate.
pub fn run(
    spec: &EquationSpec,
    grid: &Grid,
    u0: &[Complex64],
    plan: &RunPlan,
    cfg: &SolverConfig,
    observer: Option<&mut dyn FnMut(&EvolutionState, &DiagnosticsRecord)>,
) -> Result<Trajectory> {
    let state = initial_state(u0, grid, spec, plan.t0)?;
    run_from(state, None, cfg.dt_init, spec, plan, cfg, observer)
}
