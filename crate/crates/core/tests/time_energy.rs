mod common;

use common::*;
use layerflow::energy::budget_residuals;
use layerflow::rheology::{FrictionLaw, Placement, RheologyModel};
use layerflow::time_loop::{run, run_fixed, stable_dt, step, RunOptions, StepContext};
use layerflow::{Bathymetry, BoundaryKind, Integrator, LayerPartition, LayerState, Mesh, Physics, Solver, TimeControls};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LENGTH: f64 = 4.0;

fn smooth_problem(n_cells: usize, n: usize, seed: u64) -> (Solver, LayerState) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mesh = Mesh::new(0.0, LENGTH, n_cells, BoundaryKind::Periodic).unwrap();
    let x = mesh.centers();
    let bottom = smooth_field(&mut rng, &x, LENGTH, 0.0, 0.05);
    let depth = smooth_field(&mut rng, &x, LENGTH, 1.0, 0.1);
    let velocity = (0..n).map(|a| smooth_field(&mut rng, &x, LENGTH, 0.1 * a as f64, 0.2)).collect();
    let physics = Physics {
        gravity: G,
        rheology: Some(RheologyModel::newtonian(1e-4, Placement::Interface).unwrap()),
        friction: FrictionLaw {
            laminar: 0.05,
            turbulent: 0.0,
        },
    };
    let bathy = Bathymetry::new(&mesh, bottom).unwrap();
    let solver = Solver::new(mesh, LayerPartition::uniform(n).unwrap(), bathy, physics).unwrap();
    (solver, LayerState::new(depth, velocity).unwrap())
}

#[test]
fn energy_budget_residual_shrinks_with_the_mesh() {
    let controls = TimeControls {
        t_end: 0.2,
        ..TimeControls::default()
    };
    let mean_residual = |n_cells| {
        let (solver, state) = smooth_problem(n_cells, 3, 9);
        let out = run(&solver, state, &controls, &RunOptions::default(), &mut ()).unwrap();
        let r = budget_residuals(&out.energy);
        r.iter().map(|v| v.abs()).sum::<f64>() / r.len() as f64
    };
    let (coarse, fine) = (mean_residual(100), mean_residual(200));
    assert!(coarse / fine >= 1.5, "{coarse:e} -> {fine:e}");
}

#[test]
fn ssp_rk2_is_second_order_on_the_full_system() {
    let (solver, state) = smooth_problem(80, 2, 2);
    let t = 0.05;
    let at = |steps: usize| run_fixed(&solver, state.clone(), t / steps as f64, steps, Integrator::SspRk2).unwrap();
    let reference = at(160);
    let err = |s: &LayerState| {
        let mut e = max_abs_diff(&s.depth, &reference.depth);
        for (u, v) in s.velocity.iter().zip(&reference.velocity) {
            e = e.max(max_abs_diff(u, v));
        }
        e
    };
    let (e10, e20) = (err(&at(10)), err(&at(20)));
    let order = (e10 / e20).log2();
    assert!(order > 1.8, "order {order}, errors {e10:e} {e20:e}");
}

#[test]
fn friction_alone_decays_by_the_exact_euler_factor() {
    // uniform flow on a flat periodic bed: du/dt = -k u / H
    let (k, depth, u0, dt) = (0.2, 2.0, 1.5, 0.01);
    let mesh = Mesh::new(0.0, 1.0, 8, BoundaryKind::Periodic).unwrap();
    let physics = Physics {
        gravity: G,
        rheology: None,
        friction: FrictionLaw {
            laminar: k,
            turbulent: 0.0,
        },
    };
    let bathy = Bathymetry::flat(&mesh, 0.0);
    let solver = Solver::new(mesh, LayerPartition::uniform(1).unwrap(), bathy, physics).unwrap();
    let state = LayerState::new(vec![depth; 8], vec![vec![u0; 8]]).unwrap();
    let out = run_fixed(&solver, state, dt, 10, Integrator::ForwardEuler).unwrap();
    let expected = u0 * (1.0 - dt * k / depth).powi(10);
    assert!(out.velocity[0].iter().all(|u| (u - expected).abs() <= 1e-14));
}

#[test]
fn stable_step_keeps_random_dam_breaks_non_negative() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let controls = TimeControls {
        integrator: Integrator::ForwardEuler,
        cfl: 1.0,
        ..TimeControls::default()
    };
    for _ in 0..50 {
        let n_cells = 40;
        let n = rng.gen_range(1..5);
        let mesh = Mesh::new(0.0, 1.0, n_cells, BoundaryKind::Wall).unwrap();
        let depth: Vec<f64> = (0..n_cells)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..3.0) })
            .collect();
        let velocity = (0..n)
            .map(|_| depth.iter().map(|h| if *h > 0.0 { rng.gen_range(-3.0..3.0) } else { 0.0 }).collect())
            .collect();
        let solver = Solver::new(
            mesh,
            random_partition(&mut rng, n),
            Bathymetry::flat(&Mesh::new(0.0, 1.0, n_cells, BoundaryKind::Wall).unwrap(), 0.0),
            Physics::inviscid(G),
        )
        .unwrap();
        let mut state = LayerState::new(depth, velocity).unwrap();
        for s in 0..20 {
            let dt = stable_dt(&solver, &state, &controls);
            let ctx = StepContext { step: s + 1, time: 0.0 };
            state = step(&state, dt, &solver.partition, controls.integrator, ctx, |st| solver.rhs(st)).unwrap();
            assert!(state.depth.iter().all(|h| *h >= 0.0));
        }
    }
}

#[test]
fn wall_dam_break_conserves_mass_to_round_off() {
    let n_cells = 300;
    let mesh = Mesh::new(0.0, 10.0, n_cells, BoundaryKind::Wall).unwrap();
    let depth: Vec<f64> = mesh.centers().iter().map(|x| if *x < 3.0 { 2.0 } else { 0.0 }).collect();
    let bathy = Bathymetry::flat(&mesh, 0.0);
    let solver = Solver::new(mesh, LayerPartition::uniform(3).unwrap(), bathy, Physics::inviscid(G)).unwrap();
    let state = LayerState::uniform_velocity(depth, vec![0.0; n_cells], 3).unwrap();
    let controls = TimeControls {
        t_end: 3.0,
        ..TimeControls::default()
    };
    let out = run(&solver, state, &controls, &RunOptions::default(), &mut ()).unwrap();
    assert!(out.summary.mass_drift.abs() <= 1e-13, "{:e}", out.summary.mass_drift);
    assert!(out.summary.min_depth >= 0.0);
    // inviscid with a wet-dry front: energy may only fall
    assert!(out.summary.energy_drift <= 1e-12);
}
