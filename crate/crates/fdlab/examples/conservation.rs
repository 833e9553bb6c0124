//! Mass and Hamiltonian drift over a long adaptive integration. Both are
//! conserved by the flow, so any drift measures integrator error.

use fdlab::equation::{EquationKind, Sign};
use fdlab::evolve::{make_initial_data, run, InitialData, RunPlan, SolverConfig};
use fdlab::{make_grid, EquationSpec};

fn main() -> fdlab::Result<()> {
    let grid = make_grid(1024, 400.0)?;
    let data = InitialData::Gaussian {
        eps: 0.1,
        width: 1.5,
    };
    let plan = RunPlan {
        t0: 0.0,
        t_end: 100.0,
        sample_times: (1..=10).map(|i| 10.0 * i as f64).collect(),
        capture_times: vec![],
        tracked_modes: vec![],
    };
    let cfg = SolverConfig {
        rtol: 1e-10,
        ..SolverConfig::default()
    };

    for (kind, alpha) in [(EquationKind::Fkdv, 0.5), (EquationKind::Fnls, -0.25)] {
        let spec = EquationSpec::new(kind, alpha, Sign::Focusing)?;
        let (u0, _) = make_initial_data(&data, &grid, &spec)?;
        let traj = run(&spec, &grid, &u0, &plan, &cfg, None)?;
        let m0 = traj.records[0].mass;
        let h0 = traj.records[0].hamiltonian;
        println!(
            "{:?} alpha = {:+.2} ({} steps):",
            kind, alpha, traj.steps_accepted
        );
        for r in &traj.records {
            println!(
                "  t = {:5.1}: mass drift {:.3e}, hamiltonian drift {:.3e}",
                r.t,
                (r.mass - m0).abs() / m0.abs(),
                (r.hamiltonian - h0).abs() / h0.abs().max(1e-30)
            );
        }
    }
    Ok(())
}
