//! Experiment orchestration: TOML configuration, run directories, binary
//! snapshot persistence, and resumable runs.
//!
//! A run directory is laid out as
//! `runs/<name>/{meta.json, series.csv, per_xi.csv, snapshots/, reports/}`
//! and is owned by exactly one run at a time. Outputs are deterministic for a
//! fixed config: reruns produce byte-identical files.

use crate::equation::{EquationKind, EquationSpec, Sign};
use crate::evolve::{
    initial_state, make_initial_data, run_from, BlowupReport, DiagnosticsRecord, EvolutionState,
    InitialData, PerXiRecord, RunPlan, SmallnessReport, SolverConfig, Trajectory,
};
use crate::field::SpectralField;
use crate::grid::{make_grid, Grid};
use crate::scatter::PhaseAccumulator;
use crate::{validate, Complex64, Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

// ---------------------------------------------------------------------------
// configuration

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationBlock {
    pub kind: EquationKind,
    pub alpha: f64,
    pub sign: Sign,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub n: usize,
    pub box_length: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    #[serde(default)]
    pub t0: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsBlock {
    pub sample_times: Vec<f64>,
    pub capture_times: Vec<f64>,
    pub tracked_modes: Vec<i64>,
    /// Convergence-rate exponent for scattering reports; admissibility is
    /// alpha dependent, see [`p0_interval`].
    pub p0: Option<f64>,
}

/// Everything needed to reproduce a run. The physical parameters (alpha,
/// amplitude, n, box length) have no defaults on purpose: silent defaults
/// corrupt scaling studies.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub equation: EquationBlock,
    pub grid: GridBlock,
    pub data: InitialData,
    pub run: RunBlock,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsBlock,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = read_with_path(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn spec(&self) -> Result<EquationSpec> {
        EquationSpec::new(self.equation.kind, self.equation.alpha, self.equation.sign)
    }

    pub fn make_grid(&self) -> Result<Grid> {
        make_grid(self.grid.n, self.grid.box_length)
    }

    /// Non-fatal admissibility warning for the configured p0.
    pub fn p0_warning(&self) -> Option<String> {
        let p0 = self.diagnostics.p0?;
        let (lo, hi) = p0_interval(self.equation.alpha);
        if p0 > lo && p0 <= hi {
            None
        } else {
            Some(format!(
                "p0 = {p0} outside the admissible interval ({lo}, {hi}] for alpha = {}",
                self.equation.alpha
            ))
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.spec()?;
        self.make_grid()?;
        self.solver.validate()?;
        validate(!self.name.is_empty(), "run name must not be empty")?;
        validate(
            self.name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.'),
            format!("run name {:?} must be a plain file name", self.name),
        )?;
        validate(
            self.run.t_end > self.run.t0,
            format!("t_end {} not after t0 {}", self.run.t_end, self.run.t0),
        )
    }
}

/// Read a text file, labeling any I/O failure with the path.
pub fn read_with_path(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

/// Interval of convergence exponents the scattering estimates support:
/// `(0, -1e-3 alpha]` for alpha < 0 and `(0, 1e-3 (1 - alpha)]` for
/// alpha > 0.
pub fn p0_interval(alpha: f64) -> (f64, f64) {
    if alpha < 0.0 {
        (0.0, -1e-3 * alpha)
    } else {
        (0.0, 1e-3 * (1.0 - alpha))
    }
}

// ---------------------------------------------------------------------------
// snapshot persistence

const SNAP_MAGIC: [u8; 4] = *b"FDSP";
const SNAP_VERSION: u32 = 1;
const ACC_MAGIC: [u8; 4] = *b"FACC";
const ACC_VERSION: u32 = 1;

/// Binary state snapshot: magic "FDSP", version u32, kind u8 (0 fKdV,
/// 1 fNLS), sign i8, alpha f64, t f64, n u64, box_length f64, then n
/// little-endian (re, im) pairs ordered by increasing frequency index.
pub fn snapshot_save(path: &Path, state: &EvolutionState, spec: &EquationSpec) -> Result<()> {
    let grid = state.profile.grid();
    let mut buf = Vec::with_capacity(42 + 16 * grid.n());
    buf.extend_from_slice(&SNAP_MAGIC);
    buf.extend_from_slice(&SNAP_VERSION.to_le_bytes());
    buf.push(match spec.kind {
        EquationKind::Fkdv => 0,
        EquationKind::Fnls => 1,
    });
    buf.push(spec.sign.as_i8() as u8);
    buf.extend_from_slice(&spec.alpha.to_le_bytes());
    buf.extend_from_slice(&state.t.to_le_bytes());
    buf.extend_from_slice(&(grid.n() as u64).to_le_bytes());
    buf.extend_from_slice(&grid.box_length().to_le_bytes());
    for c in state.profile.coeffs() {
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

fn take<'a>(buf: &'a [u8], pos: &mut usize, len: usize, what: &str) -> Result<&'a [u8]> {
    if *pos + len > buf.len() {
        return Err(Error::Validation(format!(
            "snapshot truncated while reading {what}"
        )));
    }
    let slice = &buf[*pos..*pos + len];
    *pos += len;
    Ok(slice)
}

fn take_f64(buf: &[u8], pos: &mut usize, what: &str) -> Result<f64> {
    Ok(f64::from_le_bytes(
        take(buf, pos, 8, what)?.try_into().unwrap(),
    ))
}

fn read_bytes_with_path(path: &Path) -> Result<Vec<u8>> {
    fs::read(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

pub fn snapshot_load(path: &Path) -> Result<(EvolutionState, EquationSpec)> {
    let buf = read_bytes_with_path(path)?;
    let pos = &mut 0usize;
    validate(
        take(&buf, pos, 4, "magic")? == SNAP_MAGIC,
        format!("{} is not a state snapshot (bad magic)", path.display()),
    )?;
    let version = u32::from_le_bytes(take(&buf, pos, 4, "version")?.try_into().unwrap());
    validate(
        version == SNAP_VERSION,
        format!("snapshot version {version}, expected {SNAP_VERSION}"),
    )?;
    let kind = match take(&buf, pos, 1, "kind")?[0] {
        0 => EquationKind::Fkdv,
        1 => EquationKind::Fnls,
        other => {
            return Err(Error::Validation(format!("bad equation kind byte {other}")));
        }
    };
    let sign = Sign::from_i8(take(&buf, pos, 1, "sign")?[0] as i8)?;
    let alpha = take_f64(&buf, pos, "alpha")?;
    let t = take_f64(&buf, pos, "t")?;
    let n = u64::from_le_bytes(take(&buf, pos, 8, "n")?.try_into().unwrap()) as usize;
    let box_length = take_f64(&buf, pos, "box_length")?;
    let spec = EquationSpec::new(kind, alpha, sign)?;
    let grid = make_grid(n, box_length)?;
    let mut profile = SpectralField::zero(&grid);
    for idx in 0..n {
        let re = take_f64(&buf, pos, "coefficients")?;
        let im = take_f64(&buf, pos, "coefficients")?;
        profile.coeffs_mut()[idx] = Complex64::new(re, im);
    }
    validate(
        *pos == buf.len(),
        format!("snapshot has {} trailing bytes", buf.len() - *pos),
    )?;
    validate(t.is_finite() && t >= 0.0, format!("bad snapshot time {t}"))?;
    Ok((EvolutionState { t, profile }, spec))
}

/// The accumulator sidecar lives next to its snapshot.
pub fn sidecar_path(snapshot: &Path) -> PathBuf {
    let mut name = snapshot.file_name().unwrap_or_default().to_os_string();
    name.push(".acc");
    snapshot.with_file_name(name)
}

/// Sidecar: magic "FACC", version u32, started u8, t_last f64, next_dt f64,
/// n u64, then the running integral and the last |fhat|^2 row, n f64 each.
/// Persisting next_dt lets a resumed run reproduce the uninterrupted step
/// sequence bit for bit.
pub fn accumulator_save(path: &Path, acc: &PhaseAccumulator, next_dt: f64) -> Result<()> {
    let (t_last, integral, last_sq) = acc.parts();
    let mut buf = Vec::with_capacity(26 + 16 * integral.len());
    buf.extend_from_slice(&ACC_MAGIC);
    buf.extend_from_slice(&ACC_VERSION.to_le_bytes());
    buf.push(acc.started() as u8);
    buf.extend_from_slice(&t_last.to_le_bytes());
    buf.extend_from_slice(&next_dt.to_le_bytes());
    buf.extend_from_slice(&(integral.len() as u64).to_le_bytes());
    for v in integral.iter().chain(last_sq.iter()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, buf)?;
    Ok(())
}

pub fn accumulator_load(path: &Path) -> Result<(PhaseAccumulator, f64)> {
    let buf = read_bytes_with_path(path)?;
    let pos = &mut 0usize;
    validate(
        take(&buf, pos, 4, "magic")? == ACC_MAGIC,
        format!("{} is not an accumulator sidecar (bad magic)", path.display()),
    )?;
    let version = u32::from_le_bytes(take(&buf, pos, 4, "version")?.try_into().unwrap());
    validate(
        version == ACC_VERSION,
        format!("sidecar version {version}, expected {ACC_VERSION}"),
    )?;
    let started = take(&buf, pos, 1, "started flag")?[0] != 0;
    let t_last = take_f64(&buf, pos, "t_last")?;
    let next_dt = take_f64(&buf, pos, "next_dt")?;
    let n = u64::from_le_bytes(take(&buf, pos, 8, "n")?.try_into().unwrap()) as usize;
    let mut integral = Vec::with_capacity(n);
    let mut last_sq = Vec::with_capacity(n);
    for _ in 0..n {
        integral.push(take_f64(&buf, pos, "integral")?);
    }
    for _ in 0..n {
        last_sq.push(take_f64(&buf, pos, "last_sq")?);
    }
    validate(
        *pos == buf.len(),
        format!("sidecar has {} trailing bytes", buf.len() - *pos),
    )?;
    let acc = if started {
        PhaseAccumulator::from_parts(t_last, integral, last_sq)?
    } else {
        PhaseAccumulator::new(n)
    };
    Ok((acc, next_dt))
}

// ---------------------------------------------------------------------------
// plain-text outputs

fn fmt_row(out: &mut String, vals: &[f64]) {
    for (i, v) in vals.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

pub fn series_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::from("t,mass,hamiltonian,linf_u,linf_ux,hN0,h11,znorm\n");
    for r in records {
        fmt_row(
            &mut out,
            &[r.t, r.mass, r.hamiltonian, r.linf_u, r.linf_ux, r.h_n0, r.h11, r.z_norm],
        );
    }
    out
}

pub fn per_xi_csv(rows: &[PerXiRecord]) -> String {
    let mut out = String::from("t,xi,abs_fhat,arg_fhat,acc,phase,w_re,w_im\n");
    for r in rows {
        fmt_row(
            &mut out,
            &[r.t, r.xi, r.abs_fhat, r.arg_fhat, r.acc, r.phase, r.w_re, r.w_im],
        );
    }
    out
}

/// Serialize a report into `<dir>/reports/<name>.json`.
pub fn write_report<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let path = dir.join("reports").join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Config(format!("cannot serialize report {name}: {e}")))?;
    fs::write(&path, text + "\n")?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// run orchestration

#[derive(Serialize)]
struct RunMeta<'a> {
    config: &'a ExperimentConfig,
    threads: usize,
    resumed_from: Option<String>,
    p0_warning: Option<String>,
    smallness: Option<SmallnessReport>,
    steps_accepted: usize,
    steps_rejected: usize,
    final_time: f64,
    blowup: Option<BlowupReport>,
}

pub struct RunArtifacts {
    pub dir: PathBuf,
    pub trajectory: Trajectory,
    pub smallness: Option<SmallnessReport>,
    pub p0_warning: Option<String>,
}

fn write_capture_snapshot(
    dir: &Path,
    spec: &EquationSpec,
    t: f64,
    profile: &SpectralField,
    acc: &PhaseAccumulator,
    next_dt: f64,
) -> Result<()> {
    let snap = dir.join("snapshots").join(format!("snap_{t}.bin"));
    let state = EvolutionState {
        t,
        profile: profile.clone(),
    };
    snapshot_save(&snap, &state, spec)?;
    accumulator_save(&sidecar_path(&snap), acc, next_dt)
}

/// Execute a configured run and write the run directory under
/// `<out_root>/runs/<name>`. With `resume`, the initial state and
/// accumulator come from the given snapshot instead of the data block; the
/// snapshot must match the configured equation and grid.
pub fn run_experiment(
    config: &ExperimentConfig,
    out_root: &Path,
    threads: usize,
    resume: Option<&Path>,
) -> Result<RunArtifacts> {
    config.validate()?;
    let spec = config.spec()?;
    let grid = config.make_grid()?;
    let p0_warning = config.p0_warning();

    let (state, acc, dt_start, smallness, resumed_from) = match resume {
        Some(snap_path) => {
            let (state, snap_spec) = snapshot_load(snap_path)?;
            validate(
                snap_spec == spec,
                format!(
                    "snapshot equation ({:?}, alpha = {}, {:?}) does not match the config",
                    snap_spec.kind, snap_spec.alpha, snap_spec.sign
                ),
            )?;
            validate(
                state.profile.grid().n() == grid.n()
                    && state.profile.grid().box_length() == grid.box_length(),
                format!(
                    "snapshot grid ({}, {}) does not match the config grid ({}, {})",
                    state.profile.grid().n(),
                    state.profile.grid().box_length(),
                    grid.n(),
                    grid.box_length()
                ),
            )?;
            let sidecar = sidecar_path(snap_path);
            let (acc, next_dt) = if sidecar.exists() {
                let (acc, dt) = accumulator_load(&sidecar)?;
                (Some(acc), dt)
            } else {
                (None, config.solver.dt_init)
            };
            let from = snap_path.display().to_string();
            (state, acc, next_dt, None, Some(from))
        }
        None => {
            let (u0, smallness) = make_initial_data(&config.data, &grid, &spec)?;
            let state = initial_state(&u0, &grid, &spec, config.run.t0)?;
            (state, None, config.solver.dt_init, Some(smallness), None)
        }
    };

    let dir = out_root.join("runs").join(&config.name);
    fs::create_dir_all(dir.join("snapshots"))?;
    fs::create_dir_all(dir.join("reports"))?;

    let plan = RunPlan {
        t0: state.t,
        t_end: config.run.t_end,
        sample_times: config.diagnostics.sample_times.clone(),
        capture_times: config.diagnostics.capture_times.clone(),
        tracked_modes: config.diagnostics.tracked_modes.clone(),
    };
    let trajectory = run_from(state, acc, dt_start, &spec, &plan, &config.solver, None)?;

    fs::write(dir.join("series.csv"), series_csv(&trajectory.records))?;
    fs::write(dir.join("per_xi.csv"), per_xi_csv(&trajectory.per_xi))?;
    for cap in &trajectory.captures {
        write_capture_snapshot(&dir, &spec, cap.t, &cap.profile, &cap.accumulator, cap.next_dt)?;
    }
    let final_t = trajectory.final_state.t;
    if !trajectory
        .captures
        .iter()
        .any(|c| c.t == final_t)
    {
        write_capture_snapshot(
            &dir,
            &spec,
            final_t,
            &trajectory.final_state.profile,
            &trajectory.accumulator,
            trajectory.next_dt,
        )?;
    }

    let meta = RunMeta {
        config,
        threads,
        resumed_from,
        p0_warning: p0_warning.clone(),
        smallness,
        steps_accepted: trajectory.steps_accepted,
        steps_rejected: trajectory.steps_rejected,
        final_time: final_t,
        blowup: trajectory.blowup,
    };
    let meta_text = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Config(format!("cannot serialize run metadata: {e}")))?;
    fs::write(dir.join("meta.json"), meta_text + "\n")?;

    Ok(RunArtifacts {
        dir,
        trajectory,
        smallness: meta.smallness,
        p0_warning,
    })
}
