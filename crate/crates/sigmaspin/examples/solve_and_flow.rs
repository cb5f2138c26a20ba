//! Solve EL(psi) = 0 for a fixed map and gravitino, then relax a perturbed
//! twistor state by gradient flow.

use sigmaspin::fields::{MapField, Target};
use sigmaspin::noether::el_psi;
use sigmaspin::solvers::{gradient_flow, solve_psi, FlowOptions, SolveOptions};
use sigmaspin::spin::{SpinStructure, SpinorField};
use sigmaspin::state::ModelState;
use sigmaspin::symmetries::{twistor_state, SusyParameter};
use sigmaspin::trig::seeded_rng;
use sigmaspin::{MetricField, TorusGrid};

fn main() -> sigmaspin::Result<()> {
    let grid = TorusGrid::new(32, 2)?;
    let g = MetricField::flat(grid);
    let spin = SpinStructure::new(-1, 1)?;
    let phi = MapField::winding_map(grid, vec![[1, 0], [0, 1]], None);
    let chi = SpinorField::random(&mut seeded_rng(8, 3), grid, spin, 2, 2, 0.5);
    let sol = solve_psi(&phi, &chi, &g, &SolveOptions::default())?;
    let check = el_psi(&ModelState::new(phi.clone(), sol.psi.clone(), g.clone(), chi)?)?.norm(&g);
    println!("solve_psi: {} iterations, residual {:.2e}, independent check {check:.2e}, kernel {}", sol.iterations, sol.residual, sol.kernel_dim);

    let q = SusyParameter::constant(&g, [0.7, -0.2, 0.4, 0.5]);
    let mut s = twistor_state(&q, &MapField::winding_map(grid, vec![[2, 1], [0, 1]], None), 0.5, &g)?;
    // 1% noise in both fields
    let v = MapField::random(&mut seeded_rng(8, 4), grid, Target::FlatRn { dim: 2 }, None, 2, 1.0).values;
    let noise = SpinorField::random(&mut seeded_rng(8, 5), grid, SpinStructure::TRIVIAL, 2, 2, 0.01);
    s.phi = s.phi.moved(&v, 0.01);
    s.psi = s.phi.project_spinors(&s.psi.axpy(1.0, &noise));
    let (_, rep) = gradient_flow(&s, &FlowOptions::default())?;
    println!("flow: {:?} after {} iterations, residual {:.2e}, monotone {}", rep.status, rep.iterations, rep.residual(), rep.monotone);
    for (i, a) in rep.actions.iter().enumerate().take(8) {
        println!("  step {i}: action {a:.10}");
    }
    Ok(())
}
