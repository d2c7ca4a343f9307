//! Built-in acceptance suite behind `layerflow verify`.
//!
//! Each check builds its own scenario, runs the solver and compares against
//! a closed form, an independent small solver or an expanded algebraic
//! form. Random inputs come from seeded ChaCha streams, so every run sees
//! the same states.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{
    exchange_dissipation, friction_dissipation, interface_exchange_energy, layer_energies, newtonian_dissipation,
    total_energy,
};
use crate::error::Result;
use crate::geometry::{Bathymetry, LayerPartition};
use crate::mesh::{BoundaryKind, Mesh};
use crate::rheology::{FrictionLaw, Placement, RheologyModel};
use crate::solver::{Physics, Solver};
use crate::state::LayerState;
use crate::sv_reference::{SvModel, SvState};
use crate::time_loop::{run, run_fixed, stable_dt, step, Integrator, RunOptions, StepContext, TimeControls};

#[derive(Debug, Clone)]
pub struct CriterionReport {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] {:>2} {:<28} {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.seconds
        )
    }
}

type Check = fn() -> Result<(bool, String)>;

pub const CRITERIA: [(usize, &str, Check); 10] = [
    (1, "lake at rest", lake_at_rest),
    (2, "mass conservation", mass_conservation),
    (3, "layer collapse", layer_collapse),
    (4, "Ritter dam break", ritter_dam_break),
    (5, "inviscid energy decay", inviscid_energy),
    (6, "Newtonian dissipation", newtonian_dissipation_identity),
    (7, "vertical velocity mean", vertical_velocity_mean),
    (8, "shear relaxation", shear_relaxation),
    (9, "single-layer equivalence", single_layer_equivalence),
    (10, "upwind exchange sign", upwind_sign),
];

pub fn run_criterion(id: usize) -> CriterionReport {
    let (id, name, check) = CRITERIA[id - 1];
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionReport {
        id,
        name,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionReport> {
    (1..=CRITERIA.len()).map(run_criterion).collect()
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Smooth periodic field `mean + sum_k a_k cos(2 pi k x / L + phi_k)`.
fn smooth_field(rng: &mut ChaCha8Rng, x: &[f64], length: f64, mean: f64, amplitude: f64) -> Vec<f64> {
    let modes: Vec<(f64, f64, f64)> = (1..=3)
        .map(|k| (k as f64, rng.gen_range(-amplitude..amplitude) / k as f64, rng.gen_range(0.0..2.0 * PI)))
        .collect();
    x.iter()
        .map(|x| mean + modes.iter().map(|(k, a, p)| a * (2.0 * PI * k * x / length + p).cos()).sum::<f64>())
        .collect()
}

fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> Result<LayerPartition> {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..1.5)).collect();
    let total: f64 = w.iter().sum();
    let mut f: Vec<f64> = w.iter().map(|v| v / total).collect();
    let head: f64 = f[..n - 1].iter().sum();
    f[n - 1] = 1.0 - head;
    LayerPartition::new(f)
}

fn lake_at_rest() -> Result<(bool, String)> {
    let mesh = Mesh::new(0.0, 10.0, 100, BoundaryKind::Wall)?;
    let bottom: Vec<f64> = mesh.centers().iter().map(|x| 0.4 * (-((x - 5.0) / 1.0).powi(2)).exp()).collect();
    let eta0 = 1.0;
    let depth: Vec<f64> = bottom.iter().map(|b| eta0 - b).collect();
    let solver = Solver::new(
        mesh,
        LayerPartition::uniform(4)?,
        Bathymetry::new(&mesh, bottom.clone())?,
        Physics::inviscid(9.81),
    )?;
    let state = LayerState::uniform_velocity(depth, vec![0.0; 100], 4)?;
    let controls = TimeControls {
        t_end: 1e6,
        ..TimeControls::default()
    };
    let options = RunOptions {
        max_steps: Some(1000),
        stops: vec![],
    };
    let out = run(&solver, state, &controls, &options, &mut ())?;
    let u = max_abs(out.state.velocity.iter().flatten().copied());
    let eta = max_abs(out.state.depth.iter().zip(&bottom).map(|(h, b)| h + b - eta0));
    Ok((
        out.summary.steps == 1000 && u <= 1e-12 && eta <= 1e-12,
        format!("{} steps, max|u| = {u:.2e}, max|eta - eta0| = {eta:.2e}", out.summary.steps),
    ))
}

fn periodic_dam_break(n_layers: usize, n_cells: usize, u: f64) -> Result<(Solver, LayerState)> {
    let mesh = Mesh::new(0.0, 10.0, n_cells, BoundaryKind::Periodic)?;
    let depth: Vec<f64> = mesh
        .centers()
        .iter()
        .map(|x| if (2.5..7.5).contains(x) { 1.0 } else { 0.5 })
        .collect();
    let solver = Solver::new(
        mesh,
        LayerPartition::uniform(n_layers)?,
        Bathymetry::flat(&mesh, 0.0),
        Physics::inviscid(9.81),
    )?;
    let state = LayerState::uniform_velocity(depth, vec![u; n_cells], n_layers)?;
    Ok((solver, state))
}

fn mass_conservation() -> Result<(bool, String)> {
    let (solver, state) = periodic_dam_break(3, 200, 0.0)?;
    // two crossings of the 10 m domain at sqrt(g H) ~ 3.1 m/s
    let controls = TimeControls {
        t_end: 2.0 * 10.0 / 9.81f64.sqrt(),
        ..TimeControls::default()
    };
    let out = run(&solver, state, &controls, &RunOptions::default(), &mut ())?;
    let drift = out
        .energy
        .iter()
        .map(|e| ((e.mass - out.energy[0].mass) / out.energy[0].mass).abs())
        .fold(0.0, f64::max);
    Ok((
        drift <= 1e-12,
        format!("{} steps to t = {:.3}, max relative mass drift {drift:.2e}", out.summary.steps, out.summary.final_time),
    ))
}

fn layer_collapse() -> Result<(bool, String)> {
    let controls = TimeControls {
        t_end: 2.0,
        ..TimeControls::default()
    };
    let (multi, s4) = periodic_dam_break(4, 200, 0.3)?;
    let (single, s1) = periodic_dam_break(1, 200, 0.3)?;
    let a = run(&multi, s4, &controls, &RunOptions::default(), &mut ())?;
    let b = run(&single, s1, &controls, &RunOptions::default(), &mut ())?;
    let du = max_abs(
        a.state
            .velocity
            .iter()
            .flat_map(|u| u.iter().zip(&b.state.velocity[0]).map(|(x, y)| x - y)),
    );
    let dh = max_abs(a.state.depth.iter().zip(&b.state.depth).map(|(x, y)| x - y));
    Ok((
        du <= 1e-10 && dh <= 1e-10 && a.summary.steps == b.summary.steps,
        format!("{} steps, max|u_a - u| = {du:.2e}, max|H4 - H1| = {dh:.2e}", a.summary.steps),
    ))
}

/// Ritter solution for a dam of depth `h0` at `x0` over a dry bed.
pub fn ritter_depth(x: f64, t: f64, x0: f64, h0: f64, g: f64) -> f64 {
    let c0 = (g * h0).sqrt();
    let xi = (x - x0) / t;
    if xi <= -c0 {
        h0
    } else if xi >= 2.0 * c0 {
        0.0
    } else {
        let c = (2.0 * c0 - xi) / 3.0;
        c * c / g
    }
}

/// Cell average of the Ritter depth by composite Simpson quadrature.
fn ritter_cell_average(a: f64, b: f64, t: f64, x0: f64, h0: f64, g: f64) -> f64 {
    let m = 32;
    let h = (b - a) / m as f64;
    let mut s = ritter_depth(a, t, x0, h0, g) + ritter_depth(b, t, x0, h0, g);
    for k in 1..m {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * ritter_depth(a + k as f64 * h, t, x0, h0, g);
    }
    s * h / 3.0 / (b - a)
}

/// Forward Euler at CFL 0.9: the plain first-order Godunov setting. With
/// SSP-RK2 at CFL 0.5 the same meshes give order 0.59, the asymptotic rate
/// only being reached near 1600 cells.
pub const RITTER_CONTROLS: (Integrator, f64) = (Integrator::ForwardEuler, 0.9);

fn ritter_error(n_cells: usize) -> Result<f64> {
    let (g, x0, t_end) = (9.81, 5.0, 0.5);
    let mesh = Mesh::new(0.0, 10.0, n_cells, BoundaryKind::Transmissive)?;
    let depth = mesh.centers().iter().map(|x| if *x < x0 { 1.0 } else { 0.0 }).collect();
    let solver = Solver::new(mesh, LayerPartition::uniform(1)?, Bathymetry::flat(&mesh, 0.0), Physics::inviscid(g))?;
    let state = LayerState::new(depth, vec![vec![0.0; n_cells]])?;
    let controls = TimeControls {
        t_end,
        integrator: RITTER_CONTROLS.0,
        cfl: RITTER_CONTROLS.1,
        ..TimeControls::default()
    };
    let out = run(&solver, state, &controls, &RunOptions::default(), &mut ())?;
    let dx = mesh.dx();
    Ok((0..n_cells)
        .map(|i| {
            let a = mesh.x_min + i as f64 * dx;
            (out.state.depth[i] - ritter_cell_average(a, a + dx, t_end, x0, 1.0, g)).abs() * dx
        })
        .sum())
}

fn ritter_dam_break() -> Result<(bool, String)> {
    let (e200, e400) = (ritter_error(200)?, ritter_error(400)?);
    let order = (e200 / e400).log2();
    Ok((
        e400 < e200 && order >= 0.7,
        format!("L1(200) = {e200:.3e}, L1(400) = {e400:.3e}, order {order:.3}"),
    ))
}

fn inviscid_energy() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n_cells = 100;
    let mesh = Mesh::new(0.0, 10.0, n_cells, BoundaryKind::Periodic)?;
    let x = mesh.centers();
    let solver = Solver::new(mesh, LayerPartition::uniform(3)?, Bathymetry::flat(&mesh, 0.0), Physics::inviscid(9.81))?;
    let depth: Vec<f64> = x.iter().map(|x| if (3.0..6.0).contains(x) { 1.5 } else { 1.0 }).collect();
    let velocity = (0..3).map(|a| smooth_field(&mut rng, &x, 10.0, 0.3 * a as f64, 0.4)).collect();
    let mut state = LayerState::new(depth, velocity)?;
    let controls = TimeControls {
        t_end: 3.0,
        ..TimeControls::default()
    };
    let g = solver.physics.gravity;
    let energy = |s: &LayerState| -> Result<f64> { Ok(total_energy(&layer_energies(s, &solver.geometry(s)?, g), mesh.dx())) };

    let (mut t, mut n) = (0.0, 0);
    let mut e_prev = energy(&state)?;
    let e0 = e_prev;
    let mut worst_rise = f64::NEG_INFINITY;
    let mut dg_positive = 0usize;
    let mut dg_min = 0.0f64;
    let mut evaluations = 0usize;
    while t < controls.t_end {
        let dt = stable_dt(&solver, &state, &controls).min(controls.t_end - t);
        state = step(&state, dt, &solver.partition, controls.integrator, StepContext { step: n + 1, time: t }, |s| {
            let eval = solver.evaluate(s)?;
            evaluations += 1;
            for d in exchange_dissipation(s, &eval.euler.exchange) {
                dg_min = dg_min.min(d);
                if d > 0.0 {
                    dg_positive += 1;
                }
            }
            Ok(eval.rhs)
        })?;
        t += dt;
        n += 1;
        let e = energy(&state)?;
        worst_rise = worst_rise.max((e - e_prev) / e_prev.abs());
        e_prev = e;
    }
    Ok((
        worst_rise <= 1e-12 && dg_positive == 0 && dg_min < 0.0,
        format!(
            "{n} steps, worst relative step change {worst_rise:.2e}, E drop {:.2e}, D_G > 0 in {dg_positive} of {evaluations} evaluations, min D_G {dg_min:.2e}",
            (e0 - e_prev) / e0
        ),
    ))
}

/// Per-cell expanded right-hand side of the Newtonian energy balance,
/// assembled term by term from the layer and interface stresses.
fn expanded_dissipation(solver: &Solver, state: &LayerState) -> Result<Vec<f64>> {
    let eval = solver.evaluate(state)?;
    let mesh = solver.mesh;
    let diff = mesh.diff();
    let part = &solver.partition;
    let n = part.n_layers();
    let n_cells = mesh.n_cells;
    let zb = &solver.bathymetry.elevation;
    let st = &eval.stress;

    // independent geometry: interfaces from cumulative fractions, slopes by differencing
    let mut z = vec![vec![0.0; n_cells]; n + 1];
    let mut h = vec![vec![0.0; n_cells]; n];
    for i in 0..n_cells {
        let mut acc = zb[i];
        z[0][i] = acc;
        for a in 0..n {
            let th = if a + 1 == n { zb[i] + state.depth[i] - acc } else { part.fraction(a) * state.depth[i] };
            h[a][i] = th;
            acc += th;
            z[a + 1][i] = if a + 1 == n { zb[i] + state.depth[i] } else { acc };
        }
    }
    let dz: Vec<Vec<f64>> = z.iter().map(|zk| diff.first(zk)).collect();
    let du: Vec<Vec<f64>> = state.velocity.iter().map(|u| diff.first(u)).collect();
    let dw: Vec<Vec<f64>> = eval.vertical.w.iter().map(|w| diff.first(w)).collect();
    let law = solver.physics.friction;

    Ok((0..n_cells)
        .map(|i| {
            let mut total = 0.0;
            for a in 0..n {
                let dz_mid = 0.5 * (dz[a][i] + dz[a + 1][i]);
                let shear = dw[a][i] + dz_mid * du[a][i];
                total += 2.0 * du[a][i] * h[a][i] * st.layer_xx[a][i] + shear * h[a][i] * st.layer_zx[a][i];
            }
            for k in 0..=n {
                let jump = if k == 0 || k == n { 0.0 } else { state.velocity[k][i] - state.velocity[k - 1][i] };
                total += -2.0 * st.interface_xx[k][i] * jump * dz[k][i]
                    + st.interface_zx[k][i] * jump * (1.0 - dz[k][i] * dz[k][i]);
            }
            let c = 1.0 / (1.0 + dz[0][i] * dz[0][i]).sqrt();
            let u1 = state.velocity[0][i];
            -total - (law.laminar + law.turbulent * state.depth[i] * u1.abs()) / (c * c * c) * u1 * u1
        })
        .collect())
}

fn newtonian_dissipation_identity() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    let mut positive = 0usize;
    let trials = 1000;
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let n_cells = 16;
        let length = rng.gen_range(1.0..20.0);
        let mesh = Mesh::new(0.0, length, n_cells, BoundaryKind::Periodic)?;
        let x = mesh.centers();
        let bottom = smooth_field(&mut rng, &x, length, 0.0, 0.3);
        let mean = rng.gen_range(1.0..3.0);
        let depth = smooth_field(&mut rng, &x, length, mean, 0.3);
        let velocity = (0..n)
            .map(|_| {
                let mean = rng.gen_range(-1.0..1.0);
                smooth_field(&mut rng, &x, length, mean, 0.5)
            })
            .collect();
        let physics = Physics {
            gravity: 9.81,
            rheology: Some(RheologyModel::newtonian(rng.gen_range(1e-3..1.0), Placement::Interface)?),
            friction: FrictionLaw {
                laminar: rng.gen_range(0.0..0.5),
                turbulent: rng.gen_range(0.0..0.1),
            },
        };
        let mu = physics.viscosity();
        let solver = Solver::new(mesh, random_partition(&mut rng, n)?, Bathymetry::new(&mesh, bottom)?, physics)?;
        let state = LayerState::new(depth, velocity)?;
        let eval = solver.evaluate(&state)?;
        let compact: Vec<f64> = newtonian_dissipation(&eval.stress, &eval.geometry, mu, Placement::Interface)
            .iter()
            .zip(friction_dissipation(&state, &eval.stress))
            .map(|(v, f)| v + f)
            .collect();
        let expanded = expanded_dissipation(&solver, &state)?;
        let c: f64 = compact.iter().sum();
        let e: f64 = expanded.iter().sum();
        worst = worst.max((c - e).abs() / c.abs());
        positive += compact.iter().filter(|v| **v > 0.0).count();
    }
    Ok((
        worst <= 1e-12 && positive == 0,
        format!("{trials} states, worst relative gap {worst:.2e}, cells with R_E > 0: {positive}"),
    ))
}

fn vertical_velocity_mean() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [2, 3, 5] {
        for _ in 0..50 {
            let n_cells = 24;
            let length = rng.gen_range(1.0..10.0);
            let boundary = if rng.gen_bool(0.5) { BoundaryKind::Periodic } else { BoundaryKind::Transmissive };
            let mesh = Mesh::new(0.0, length, n_cells, boundary)?;
            let x = mesh.centers();
            let bottom = smooth_field(&mut rng, &x, length, 0.0, 0.3);
            let depth = smooth_field(&mut rng, &x, length, 1.5, 0.4);
            let velocity = (0..n).map(|_| smooth_field(&mut rng, &x, length, 0.0, 1.0)).collect();
            let solver = Solver::new(mesh, random_partition(&mut rng, n)?, Bathymetry::new(&mesh, bottom)?, Physics::inviscid(9.81))?;
            let state = LayerState::new(depth, velocity)?;
            let eval = solver.evaluate(&state)?;
            let (g, v) = (&eval.geometry, &eval.vertical);
            for a in 0..n {
                for i in 0..n_cells {
                    let (lo, hi) = (g.interfaces[a][i], g.interfaces[a + 1][i]);
                    // exact integral of the affine profile (two-point Gauss is exact)
                    let r = 0.5 / 3f64.sqrt();
                    let mid = 0.5 * (lo + hi);
                    let integral =
                        0.5 * (hi - lo) * (v.profile(a, i, mid - r * (hi - lo)) + v.profile(a, i, mid + r * (hi - lo)));
                    worst = worst.max((integral - g.thickness[a][i] * v.w[a][i]).abs());
                    count += 1;
                }
            }
        }
    }
    Ok((worst <= 1e-12, format!("{count} layer cells, worst |int w_hat - h w| = {worst:.2e}")))
}

/// Crank-Nicolson integration of `h_a du_a/dt = mu [(u_{a+1}-u_a)/g_{a+1} - (u_a-u_{a-1})/g_a]`
/// with stress-free ends, solved by the Thomas algorithm.
fn diffusion_oracle(u0: &[f64], h: &[f64], gaps: &[f64], mu: f64, dt: f64, steps: usize) -> Vec<Vec<f64>> {
    let n = u0.len();
    // L u = (1/h_a) [c_up (u_{a+1}-u_a) - c_lo (u_a-u_{a-1})]
    let up: Vec<f64> = (0..n).map(|a| if a + 1 < n { mu / (h[a] * gaps[a + 1]) } else { 0.0 }).collect();
    let lo: Vec<f64> = (0..n).map(|a| if a > 0 { mu / (h[a] * gaps[a]) } else { 0.0 }).collect();
    let mut u = u0.to_vec();
    let mut out = vec![u.clone()];
    for _ in 0..steps {
        let rhs: Vec<f64> = (0..n)
            .map(|a| {
                let mut lu = -(up[a] + lo[a]) * u[a];
                if a + 1 < n {
                    lu += up[a] * u[a + 1];
                }
                if a > 0 {
                    lu += lo[a] * u[a - 1];
                }
                u[a] + 0.5 * dt * lu
            })
            .collect();
        // (I - dt/2 L) u_new = rhs
        let sub: Vec<f64> = (0..n).map(|a| -0.5 * dt * lo[a]).collect();
        let diag: Vec<f64> = (0..n).map(|a| 1.0 + 0.5 * dt * (up[a] + lo[a])).collect();
        let sup: Vec<f64> = (0..n).map(|a| -0.5 * dt * up[a]).collect();
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = sup[0] / diag[0];
        d[0] = rhs[0] / diag[0];
        for a in 1..n {
            let m = diag[a] - sub[a] * c[a - 1];
            c[a] = sup[a] / m;
            d[a] = (rhs[a] - sub[a] * d[a - 1]) / m;
        }
        u[n - 1] = d[n - 1];
        for a in (0..n - 1).rev() {
            u[a] = d[a] - c[a] * u[a + 1];
        }
        out.push(u.clone());
    }
    out
}

fn spread(u: &[f64]) -> f64 {
    u.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - u.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn shear_relaxation() -> Result<(bool, String)> {
    let (n, depth, mu, t_end) = (8, 1.0, 0.01, 20.0);
    let mesh = Mesh::new(0.0, 1.0, 4, BoundaryKind::Periodic)?;
    let part = LayerPartition::uniform(n)?;
    let physics = Physics {
        gravity: 9.81,
        rheology: Some(RheologyModel::newtonian(mu, Placement::Interface)?),
        friction: FrictionLaw::default(),
    };
    let solver = Solver::new(mesh, part.clone(), Bathymetry::flat(&mesh, 0.0), physics)?;
    let profile: Vec<f64> = (0..n).map(|a| (PI * (a as f64 + 0.5) / n as f64).cos()).collect();
    let state = LayerState::new(vec![depth; 4], profile.iter().map(|u| vec![*u; 4]).collect())?;
    let controls = TimeControls {
        t_end,
        ..TimeControls::default()
    };
    let out = run(&solver, state.clone(), &controls, &RunOptions::default(), &mut ())?;

    // replay to record the spread at every step
    let mut s = state;
    let mut t = 0.0;
    let mut times = vec![0.0];
    let mut spreads = vec![spread(&s.velocity.iter().map(|u| u[0]).collect::<Vec<_>>())];
    for (k, dt) in out.dts.iter().enumerate() {
        s = step(&s, *dt, &part, controls.integrator, StepContext { step: k + 1, time: t }, |x| solver.rhs(x))?;
        t += dt;
        times.push(t);
        spreads.push(spread(&s.velocity.iter().map(|u| u[0]).collect::<Vec<_>>()));
    }
    let monotone = spreads.windows(2).all(|w| w[1] <= w[0]);

    let h = part.thicknesses(depth);
    let mut gaps = vec![0.5 * h[0]];
    gaps.extend((1..n).map(|a| 0.5 * (h[a - 1] + h[a])));
    gaps.push(0.5 * h[n - 1]);
    let oracle_dt = 1e-3;
    let oracle_steps = (t_end / oracle_dt).round() as usize;
    let reference = diffusion_oracle(&profile, &h, &gaps, mu, oracle_dt, oracle_steps);
    let oracle_spread = |time: f64| spread(&reference[(time / oracle_dt).round() as usize]);
    let solver_spread = |time: f64| {
        let k = times.iter().position(|x| *x >= time).unwrap_or(times.len() - 1);
        // linear interpolation in log space between recorded steps
        if k == 0 {
            return spreads[0];
        }
        let (t0, t1) = (times[k - 1], times[k]);
        let w = (time - t0) / (t1 - t0);
        (spreads[k - 1].ln() * (1.0 - w) + spreads[k].ln() * w).exp()
    };
    let (ta, tb) = (0.25 * t_end, 0.5 * t_end);
    let rate = |f: &dyn Fn(f64) -> f64| (f(ta) / f(tb)).ln() / (tb - ta);
    let (r_solver, r_oracle) = (rate(&solver_spread), rate(&oracle_spread));
    let rel = (r_solver - r_oracle).abs() / r_oracle;
    Ok((
        monotone && rel <= 0.1,
        format!(
            "{} steps, monotone: {monotone}, decay rate {r_solver:.5} vs oracle {r_oracle:.5} (rel. diff {rel:.2e})",
            out.summary.steps
        ),
    ))
}

fn single_layer_equivalence() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_rhs = 0.0f64;
    let mut worst_traj = 0.0f64;
    let trials = 20;
    for trial in 0..trials {
        let n_cells = 32;
        let length = rng.gen_range(5.0..20.0);
        let boundary = [BoundaryKind::Periodic, BoundaryKind::Wall, BoundaryKind::Transmissive][trial % 3];
        let mesh = Mesh::new(0.0, length, n_cells, boundary)?;
        let x = mesh.centers();
        let bottom = smooth_field(&mut rng, &x, length, 0.0, 0.2);
        let depth = smooth_field(&mut rng, &x, length, 1.0, 0.2);
        let velocity = smooth_field(&mut rng, &x, length, 0.0, 0.5);
        let mu = rng.gen_range(1e-3..0.1);
        let friction = FrictionLaw {
            laminar: rng.gen_range(0.0..0.2),
            turbulent: rng.gen_range(0.0..0.05),
        };
        let physics = Physics {
            gravity: 9.81,
            rheology: Some(RheologyModel::newtonian(mu, Placement::Interface)?),
            friction,
        };
        let solver = Solver::new(mesh, LayerPartition::uniform(1)?, Bathymetry::new(&mesh, bottom.clone())?, physics)?;
        let model = SvModel {
            mesh,
            bottom,
            g: 9.81,
            mu,
            k_laminar: friction.laminar,
            k_turbulent: friction.turbulent,
        };
        let state = LayerState::new(depth.clone(), vec![velocity.clone()])?;
        let sv = SvState::new(depth, velocity)?;
        let a = solver.rhs(&state)?;
        let b = model.rhs(&sv)?;
        let gap = max_abs(
            a.depth
                .iter()
                .zip(&b.depth)
                .chain(a.discharge[0].iter().zip(&b.discharge))
                .map(|(x, y)| x - y),
        );
        worst_rhs = worst_rhs.max(gap);

        let dt = 0.5 * stable_dt(&solver, &state, &TimeControls::default());
        let ml = run_fixed(&solver, state, dt, 100, Integrator::SspRk2)?;
        let mut s = sv;
        for _ in 0..100 {
            s = model.ssp_rk2_step(&s, dt)?;
        }
        let traj = max_abs(
            ml.depth
                .iter()
                .zip(&s.depth)
                .chain(ml.velocity[0].iter().zip(&s.velocity))
                .map(|(x, y)| x - y),
        );
        worst_traj = worst_traj.max(traj);
    }
    Ok((
        worst_rhs <= 1e-14 && worst_traj <= 1e-12,
        format!("{trials} states, worst RHS gap {worst_rhs:.2e}, worst gap after 100 steps {worst_traj:.2e}"),
    ))
}

fn upwind_sign() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut upwind_violations = 0usize;
    let mut witnessed = 0usize;
    let mut interfaces = 0usize;
    let lambda = 0.25;
    for _ in 0..200 {
        let n = rng.gen_range(2..=5);
        let n_cells = 16;
        let length = 10.0;
        let mesh = Mesh::new(0.0, length, n_cells, BoundaryKind::Periodic)?;
        let x = mesh.centers();
        let bottom = smooth_field(&mut rng, &x, length, 0.0, 0.2);
        let depth = smooth_field(&mut rng, &x, length, 1.0, 0.3);
        let velocity = (0..n)
            .map(|_| {
                let mean = rng.gen_range(-1.0..1.0);
                smooth_field(&mut rng, &x, length, mean, 0.5)
            })
            .collect();
        let solver = Solver::new(mesh, random_partition(&mut rng, n)?, Bathymetry::new(&mesh, bottom)?, Physics::inviscid(9.81))?;
        let state = LayerState::new(depth, velocity)?;
        let eval = solver.evaluate(&state)?;
        let ex = &eval.euler.exchange;
        for k in 1..n {
            for i in 0..n_cells {
                let (lo, hi, rate) = (state.velocity[k - 1][i], state.velocity[k][i], ex.rate[k][i]);
                let scale = (lo * lo + hi * hi) * rate.abs();
                let tol = 64.0 * f64::EPSILON * scale;
                interfaces += 1;
                if interface_exchange_energy(lo, hi, ex.velocity[k][i], rate) > tol {
                    upwind_violations += 1;
                }
                let interior = lambda * lo + (1.0 - lambda) * hi;
                if interface_exchange_energy(lo, hi, interior, rate) > tol {
                    witnessed += 1;
                }
            }
        }
    }
    Ok((
        upwind_violations == 0 && witnessed > 0,
        format!(
            "{interfaces} interfaces, upwind positive: {upwind_violations}, lambda = {lambda} positive: {witnessed}"
        ),
    ))
}
