mod common;

use common::*;
use layerflow::rheology::{FrictionLaw, Placement, RheologyModel};
use layerflow::solver::Evaluation;
use layerflow::{Bathymetry, BoundaryKind, LayerPartition, LayerState, Mesh, Physics, Solver};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LENGTH: f64 = 2.0;

fn viscous_solver(n_cells: usize, part: LayerPartition, bottom: Vec<f64>, mu: f64, placement: Placement, friction: FrictionLaw) -> Solver {
    let mesh = Mesh::new(0.0, LENGTH, n_cells, BoundaryKind::Periodic).unwrap();
    let bathy = Bathymetry::new(&mesh, bottom).unwrap();
    let physics = Physics {
        gravity: G,
        rheology: Some(RheologyModel::newtonian(mu, placement).unwrap()),
        friction,
    };
    Solver::new(mesh, part, bathy, physics).unwrap()
}

struct Case {
    bottom: Vec<f64>,
    depth: Vec<f64>,
    velocity: Vec<Vec<f64>>,
}

fn random_case(seed: u64, x: &[f64], n: usize) -> Case {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Case {
        bottom: smooth_field(&mut rng, x, LENGTH, 0.0, 0.1),
        depth: smooth_field(&mut rng, x, LENGTH, 1.0, 0.2),
        velocity: (0..n).map(|_| smooth_field(&mut rng, x, LENGTH, 0.2, 0.5)).collect(),
    }
}

fn evaluate(solver: &Solver, case: &Case) -> Evaluation {
    let state = LayerState::new(case.depth.clone(), case.velocity.clone()).unwrap();
    solver.evaluate(&state).unwrap()
}

#[test]
fn interface_traction_is_the_rotated_stress() {
    let n = 4;
    let x = centers(0.0, LENGTH, 100);
    let case = random_case(3, &x, n);
    for placement in [Placement::Interface, Placement::Layer] {
        let solver = viscous_solver(100, LayerPartition::uniform(n).unwrap(), case.bottom.clone(), 0.05, placement, FrictionLaw::default());
        let e = evaluate(&solver, &case);
        let s = &e.stress;
        for k in 1..n {
            for i in 0..100 {
                let slope = e.geometry.interface_slopes[k][i];
                // tangential traction on a surface of slope s, unnormalised
                let (xx, zz, zx, xz) = (s.interface_xx[k][i], s.interface_zz[k][i], s.interface_zx[k][i], s.interface_xz[k][i]);
                let full = xz - slope * (xx - zz) - slope * slope * zx;
                let newtonian = -2.0 * xx * slope + zx * (1.0 - slope * slope);
                assert!((s.traction[k][i] - full).abs() <= 1e-14 * (1.0 + full.abs()));
                assert!((full - newtonian).abs() <= 1e-14 * (1.0 + full.abs()));
            }
        }
    }
}

#[test]
fn periodic_viscous_terms_over_a_level_bed_only_exchange_momentum_with_it() {
    let n_cells = 120;
    let x = centers(0.0, LENGTH, n_cells);
    let friction = FrictionLaw {
        laminar: 0.3,
        turbulent: 0.02,
    };
    for (seed, n) in [(1, 1), (2, 3), (4, 6)] {
        let case = random_case(seed, &x, n);
        for placement in [Placement::Interface, Placement::Layer] {
            let solver = viscous_solver(n_cells, LayerPartition::uniform(n).unwrap(), vec![0.3; n_cells], 0.02, placement, friction);
            let e = evaluate(&solver, &case);
            let dx = solver.mesh.dx();
            let total: f64 = e.viscous.iter().flatten().sum::<f64>() * dx;
            let bed: f64 = e.stress.traction[0].iter().sum::<f64>() * dx;
            let scale = e.viscous.iter().flatten().map(|v| v.abs()).sum::<f64>() * dx;
            assert!((total + bed).abs() <= 1e-12 * scale.max(1.0), "N={n} {placement}: {total} vs {bed}");
            assert!(e.stress.traction[n].iter().all(|s| *s == 0.0));
        }
    }
}

#[test]
fn stress_placements_converge_under_vertical_refinement() {
    // continuous column u = 0.2 + 0.3 cos(pi z / H), shear-free at both ends
    let n_cells = 60;
    let x = centers(0.0, LENGTH, n_cells);
    let bottom = vec![0.0; n_cells];
    let depth: Vec<f64> = x.iter().map(|x| 1.0 + 0.1 * (std::f64::consts::PI * x).sin()).collect();
    let mut gaps = Vec::new();
    for n in [4, 8, 16] {
        let velocity: Vec<Vec<f64>> = (0..n)
            .map(|a| {
                let z = (a as f64 + 0.5) / n as f64;
                depth.iter().map(|_| 0.2 + 0.3 * (std::f64::consts::PI * z).cos()).collect()
            })
            .collect();
        let case = Case {
            bottom: bottom.clone(),
            depth: depth.clone(),
            velocity,
        };
        let part = LayerPartition::uniform(n).unwrap();
        let at = |p| {
            let s = viscous_solver(n_cells, part.clone(), bottom.clone(), 0.01, p, FrictionLaw::default());
            evaluate(&s, &case).stress
        };
        let (iface, layer) = (at(Placement::Interface), at(Placement::Layer));
        // compare the interior interface shear stresses
        let gap = (1..n)
            .flat_map(|k| (0..n_cells).map(move |i| (k, i)))
            .map(|(k, i)| (iface.interface_zx[k][i] - layer.interface_zx[k][i]).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    assert!(gaps[0] > 0.0);
    for w in gaps.windows(2) {
        assert!(w[0] / w[1] >= 1.8, "{gaps:?}");
    }
}

#[test]
fn linear_shear_gives_uniform_stress() {
    // u = c z on a flat bed with uniform depth: Sigma_zx = mu c everywhere
    let (n, n_cells, mu, c) = (5, 20, 0.04, 0.7);
    let depth = 2.0;
    let velocity: Vec<Vec<f64>> = (0..n)
        .map(|a| vec![c * depth * (a as f64 + 0.5) / n as f64; n_cells])
        .collect();
    let case = Case {
        bottom: vec![0.0; n_cells],
        depth: vec![depth; n_cells],
        velocity,
    };
    let solver = viscous_solver(n_cells, LayerPartition::uniform(n).unwrap(), vec![0.0; n_cells], mu, Placement::Interface, FrictionLaw::default());
    let e = evaluate(&solver, &case);
    for k in 1..n {
        for i in 0..n_cells {
            assert!((e.stress.interface_zx[k][i] - mu * c).abs() <= 1e-13);
            assert!(e.stress.interface_xx[k][i].abs() <= 1e-13);
        }
    }
    // only the top and bottom layers feel a stress jump
    for a in 1..n - 1 {
        assert!(e.viscous[a].iter().all(|v| v.abs() <= 1e-12));
    }
    assert!(e.viscous[n - 1].iter().all(|v| (v + mu * c).abs() <= 1e-12));
}
