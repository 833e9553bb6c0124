use clap::{Args, Parser, Subcommand};
use fdlab::experiments::{
    p0_interval, run_experiment, write_report, EquationBlock, ExperimentConfig, GridBlock,
};
use fdlab::groundstate::{existence_warning, scaling_law_check};
use fdlab::linear::dispersive_bench;
use fdlab::scatter::{
    convergence_report, corrected_profile, decay_fit, phase_drift_report, phase_inequality_check,
    resonant_asymptotic_check, stationary_phase_model_deviation, CorrectedProfile, PhaseSample,
};
use fdlab::{Complex64, EquationSpec, Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fdlab", version, about = "Pseudospectral laboratory for fractional dispersive equations on large periodic boxes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate a configured initial-value problem and write the run directory
    Evolve(RunArgs),
    /// Evolve, then report corrected-profile convergence and phase drift
    Scatter(RunArgs),
    /// Solve for solitary profiles across a parameter sweep and fit scaling laws
    Groundstate(BenchArgs),
    /// Free-flow sup-norm decay of a dyadic band against the dispersive bound
    Linbench(BenchArgs),
    /// Monte Carlo minimum of the ordered power-sum inequality margin
    InequalityBench(BenchArgs),
    /// Windowed resonant integrals against the stationary-phase prediction
    ResonanceCheck(BenchArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output root; artifacts land in <out>/runs/<name>
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// State snapshot to resume from (with its .acc sidecar if present)
    #[arg(long)]
    resume: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Benchmark configuration (TOML)
    #[arg(long)]
    config: PathBuf,
    /// Output root; artifacts land in <out>/runs/<name>
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Worker threads (0 = all cores)
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evolve(args) => cmd_evolve(args),
        Command::Scatter(args) => cmd_scatter(args),
        Command::Groundstate(args) => cmd_groundstate(args),
        Command::Linbench(args) => cmd_linbench(args),
        Command::InequalityBench(args) => cmd_inequality(args),
        Command::ResonanceCheck(args) => cmd_resonance(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn init_threads(threads: usize) -> usize {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    let _ = builder.build_global();
    rayon::current_num_threads()
}

// ---------------------------------------------------------------------------
// evolve / scatter

fn start_run(args: &RunArgs) -> Result<(ExperimentConfig, fdlab::experiments::RunArtifacts)> {
    let threads = init_threads(args.threads);
    let cfg = ExperimentConfig::load(&args.config)?;
    if let Some(w) = cfg.p0_warning() {
        eprintln!("warning: {w}");
    }
    let art = run_experiment(&cfg, &args.out, threads, args.resume.as_deref())?;
    if let Some(b) = art.trajectory.blowup {
        return Err(Error::Numerical(format!(
            "run {} stopped by the blow-up monitor at t = {} ({:?}); partial outputs in {}",
            cfg.name,
            b.t_star,
            b.reason,
            art.dir.display()
        )));
    }
    Ok((cfg, art))
}

fn cmd_evolve(args: RunArgs) -> Result<()> {
    let (cfg, art) = start_run(&args)?;
    let traj = &art.trajectory;
    println!(
        "run {}: reached t = {} in {} steps ({} rejected)",
        cfg.name, traj.final_state.t, traj.steps_accepted, traj.steps_rejected
    );
    if let Some(s) = &art.smallness {
        println!(
            "initial data: eps0 = {:.6e}, z norm = {:.6e}",
            s.eps0, s.z_norm
        );
    }
    println!("artifacts in {}", art.dir.display());
    Ok(())
}

fn cmd_scatter(args: RunArgs) -> Result<()> {
    let (cfg, art) = start_run(&args)?;
    let spec = cfg.spec()?;
    let caps = &art.trajectory.captures;
    if caps.len() < 4 || caps.iter().any(|c| c.t < 1.0) {
        return Err(Error::Validation(
            "scattering diagnostics need at least 4 capture times, all at t >= 1".into(),
        ));
    }

    let ws: Vec<CorrectedProfile> = caps
        .iter()
        .map(|c| corrected_profile(&c.profile, c.t, &c.accumulator, &spec))
        .collect::<Result<_>>()?;
    let p0 = cfg
        .diagnostics
        .p0
        .unwrap_or_else(|| 0.5 * p0_interval(cfg.equation.alpha).1);
    let conv = convergence_report(&ws, p0)?;
    write_report(&art.dir, "convergence", &conv)?;
    let diffs: Vec<String> = conv.diffs.iter().map(|d| format!("{d:.3e}")).collect();
    println!(
        "corrected-profile differences: [{}], slope {:.3}",
        diffs.join(", "),
        conv.slope
    );

    // phase drift at the dominant frequency of the final profile
    let grid = cfg.make_grid()?;
    let fin = &art.trajectory.final_state.profile;
    let idx0 = (0..grid.n())
        .filter(|&idx| {
            let xi = grid.xi(idx);
            (0.3..=3.0).contains(&xi)
        })
        .max_by(|&i, &j| fin.coeffs()[i].norm().total_cmp(&fin.coeffs()[j].norm()))
        .ok_or_else(|| Error::Validation("grid has no frequencies in [0.3, 3]".into()))?;
    let xi0 = grid.xi(idx0);
    let samples: Vec<PhaseSample> = caps
        .iter()
        .map(|c| PhaseSample {
            t: c.t,
            fhat: c.profile.coeffs()[idx0],
            acc: c.accumulator.integral(idx0),
        })
        .collect();
    let drift = phase_drift_report(xi0, &samples, &spec)?;
    write_report(&art.dir, "phase_drift", &drift)?;
    println!(
        "phase drift at xi = {:.4}: raw {:.4}, corrected {:.4}, ratio {:.4}",
        drift.xi0, drift.tv_raw, drift.tv_corrected, drift.ratio
    );

    let series: Vec<(f64, f64)> = art
        .trajectory
        .records
        .iter()
        .filter(|r| r.t >= 1.0)
        .map(|r| (r.t, r.linf_u))
        .collect();
    match decay_fit(&series, (1.0, cfg.run.t_end)) {
        Ok(fit) => {
            write_report(&art.dir, "decay_fit", &fit)?;
            println!(
                "sup-norm decay: slope {:.4} over {} samples",
                fit.slope, fit.points_used
            );
        }
        Err(e) => eprintln!("decay fit skipped: {e}"),
    }
    println!("artifacts in {}", art.dir.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// bench configurations

fn load_bench<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fdlab::experiments::read_with_path(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn bench_dir(out: &Path, name: &str) -> Result<PathBuf> {
    let plain = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.');
    if !plain {
        return Err(Error::Validation(format!(
            "run name {name:?} must be a plain file name"
        )));
    }
    let dir = out.join("runs").join(name);
    fs::create_dir_all(dir.join("reports"))?;
    Ok(dir)
}

fn write_bench_meta<C: Serialize>(dir: &Path, config: &C, threads: usize) -> Result<()> {
    #[derive(Serialize)]
    struct BenchMeta<'a, C> {
        config: &'a C,
        threads: usize,
    }
    let meta = BenchMeta { config, threads };
    let text = serde_json::to_string_pretty(&meta)
        .map_err(|e| Error::Config(format!("cannot serialize metadata: {e}")))?;
    fs::write(dir.join("meta.json"), text + "\n")?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepBlock {
    params: Vec<f64>,
    tol: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroundstateConfig {
    name: String,
    equation: EquationBlock,
    grid: GridBlock,
    sweep: SweepBlock,
}

fn cmd_groundstate(args: BenchArgs) -> Result<()> {
    let threads = init_threads(args.threads);
    let cfg: GroundstateConfig = load_bench(&args.config)?;
    let spec = EquationSpec::new(cfg.equation.kind, cfg.equation.alpha, cfg.equation.sign)?;
    if let Some(w) = existence_warning(&spec) {
        eprintln!("warning: {w}");
    }
    let grid = fdlab::make_grid(cfg.grid.n, cfg.grid.box_length)?;
    let dir = bench_dir(&args.out, &cfg.name)?;
    let report = scaling_law_check(&spec, &cfg.sweep.params, &grid, cfg.sweep.tol)?;
    write_bench_meta(&dir, &cfg, threads)?;
    write_report(&dir, "scaling", &report)?;
    for i in 0..report.params.len() {
        println!(
            "param {:.4}: mass {:.8}, energy {:.8}, residual {:.3e}",
            report.params[i], report.mass[i], report.energy[i], report.residuals[i]
        );
    }
    println!(
        "slopes: mass {:.6}, energy {:.6}, half-weight {:.6}",
        report.mass_slope, report.energy_slope, report.half_weight_slope
    );
    println!("artifacts in {}", dir.display());
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BandBlock {
    band: i32,
    times: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinbenchConfig {
    name: String,
    equation: EquationBlock,
    grid: GridBlock,
    bench: BandBlock,
}

fn cmd_linbench(args: BenchArgs) -> Result<()> {
    let threads = init_threads(args.threads);
    let cfg: LinbenchConfig = load_bench(&args.config)?;
    let spec = EquationSpec::new(cfg.equation.kind, cfg.equation.alpha, cfg.equation.sign)?;
    let grid = fdlab::make_grid(cfg.grid.n, cfg.grid.box_length)?;
    let dir = bench_dir(&args.out, &cfg.name)?;
    let report = dispersive_bench(&spec, cfg.bench.band, &cfg.bench.times, &grid)?;
    write_bench_meta(&dir, &cfg, threads)?;
    write_report(&dir, "linbench", &report)?;
    let kind = match report.kind {
        fdlab::EquationKind::Fkdv => "fkdv",
        fdlab::EquationKind::Fnls => "fnls",
    };
    println!(
        "band {} ({kind}, alpha = {}): fitted slope {:.4}, bound constant {:.4}",
        report.band, report.alpha, report.fitted_slope, report.fitted_constant
    );
    println!("artifacts in {}", dir.display());
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InequalityBlock {
    alphas: Vec<f64>,
    n_samples: usize,
    seed: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InequalityConfig {
    name: String,
    bench: InequalityBlock,
}

fn cmd_inequality(args: BenchArgs) -> Result<()> {
    let threads = init_threads(args.threads);
    let cfg: InequalityConfig = load_bench(&args.config)?;
    let dir = bench_dir(&args.out, &cfg.name)?;
    let mut reports = Vec::new();
    for &alpha in &cfg.bench.alphas {
        let r = phase_inequality_check(alpha, cfg.bench.n_samples, cfg.bench.seed)?;
        println!(
            "alpha = {:+.3}: min ratio {:.6e} at (a, b, c) = ({:.4e}, {:.4e}, {:.4e})",
            r.alpha, r.min_ratio, r.worst[0], r.worst[1], r.worst[2]
        );
        reports.push(r);
    }
    write_bench_meta(&dir, &cfg, threads)?;
    write_report(&dir, "inequality", &reports)?;
    println!("artifacts in {}", dir.display());
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResonantBlock {
    xi: f64,
    s_values: Vec<f64>,
    /// "flat" tests the bare kernel; "gaussian" adds a smooth profile.
    #[serde(default = "default_profile")]
    profile: String,
}

fn default_profile() -> String {
    "flat".into()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResonanceConfig {
    name: String,
    equation: EquationBlock,
    #[serde(default)]
    model_n: Vec<f64>,
    resonant: Option<ResonantBlock>,
}

#[derive(Serialize)]
struct ModelRow {
    n: f64,
    deviation: f64,
    bound_const: f64,
}

fn cmd_resonance(args: BenchArgs) -> Result<()> {
    let threads = init_threads(args.threads);
    let cfg: ResonanceConfig = load_bench(&args.config)?;
    let spec = EquationSpec::new(cfg.equation.kind, cfg.equation.alpha, cfg.equation.sign)?;
    let dir = bench_dir(&args.out, &cfg.name)?;
    write_bench_meta(&dir, &cfg, threads)?;

    if !cfg.model_n.is_empty() {
        let mut rows = Vec::new();
        for &n in &cfg.model_n {
            let deviation = stationary_phase_model_deviation(n)?;
            let bound_const = deviation.abs() * n.sqrt();
            println!(
                "model N = {n}: deviation from the limit {deviation:+.6e} (C = {bound_const:.3e})"
            );
            rows.push(ModelRow {
                n,
                deviation,
                bound_const,
            });
        }
        write_report(&dir, "model_check", &rows)?;
    }

    if let Some(res) = &cfg.resonant {
        let profile: Box<dyn Fn(f64) -> Complex64> = match res.profile.as_str() {
            "flat" => Box::new(|_| Complex64::new(1.0, 0.0)),
            "gaussian" => Box::new(|xi| Complex64::new((-0.5 * xi * xi).exp(), 0.0)),
            other => {
                return Err(Error::Config(format!(
                    "unknown profile {other:?}, expected \"flat\" or \"gaussian\""
                )));
            }
        };
        let mut reports = Vec::new();
        for &s in &res.s_values {
            let r = resonant_asymptotic_check(&profile, res.xi, s, &spec)?;
            println!(
                "resonant xi = {}, s = {:.0}: window {:.3e}, deviation {:.6}",
                r.xi, r.s, r.window, r.deviation
            );
            reports.push(r);
        }
        write_report(&dir, "resonant", &reports)?;
    } else if cfg.model_n.is_empty() {
        return Err(Error::Config(
            "config requests neither the model integral nor a resonant sweep".into(),
        ));
    }
    println!("artifacts in {}", dir.display());
    Ok(())
}
