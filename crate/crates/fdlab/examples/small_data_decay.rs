//! Nonlinear evolution of a small Gaussian: the sup norm decays at the
//! linear rate t^{-1/2} once the wave packet has spread.

use fdlab::equation::{EquationKind, Sign};
use fdlab::evolve::{make_initial_data, run, InitialData, RunPlan, SolverConfig};
use fdlab::scatter::decay_fit;
use fdlab::{make_grid, EquationSpec};

fn main() -> fdlab::Result<()> {
    let grid = make_grid(2048, 800.0)?;
    let data = InitialData::Gaussian {
        eps: 0.05,
        width: 1.0,
    };
    let sample_times: Vec<f64> = (0..25).map(|i| 2f64.powf(i as f64 / 4.0)).collect();
    let plan = RunPlan {
        t0: 0.0,
        t_end: 64.0,
        sample_times: sample_times.clone(),
        capture_times: vec![],
        tracked_modes: vec![],
    };
    let cfg = SolverConfig {
        rtol: 1e-8,
        ..SolverConfig::default()
    };

    for (kind, alpha) in [(EquationKind::Fkdv, 0.5), (EquationKind::Fnls, -0.5)] {
        let spec = EquationSpec::new(kind, alpha, Sign::Focusing)?;
        let (u0, smallness) = make_initial_data(&data, &grid, &spec)?;
        let traj = run(&spec, &grid, &u0, &plan, &cfg, None)?;
        let series: Vec<(f64, f64)> = traj
            .records
            .iter()
            .filter(|r| r.t >= 1.0)
            .map(|r| (r.t, r.linf_u))
            .collect();
        let fit = decay_fit(&series, (1.0, 64.0))?;
        println!(
            "{:?} alpha = {:+.1}: eps0 = {:.3e}, fitted decay slope {:+.4} over {} samples",
            kind, alpha, smallness.eps0, fit.slope, fit.points_used
        );
        for r in traj.records.iter().filter(|r| r.t.fract() == 0.0 && r.t > 0.0) {
            if r.t.log2().fract() == 0.0 {
                println!(
                    "  t = {:5.1}: sup |u| = {:.6e}, t^(1/2) sup = {:.6e}",
                    r.t,
                    r.linf_u,
                    r.t.sqrt() * r.linf_u
                );
            }
        }
    }
    println!("(slopes drift toward -0.5 as the horizon grows; at t = 64 the");
    println!(" packet is still partly in the pre-asymptotic plateau)");
    Ok(())
}
