//! Explicit time integration with advective and viscous stability limits.

use std::fmt;
use std::str::FromStr;

use crate::energy::{sample, EnergySample};
use crate::error::{Error, Result};
use crate::geometry::LayerPartition;
use crate::solver::{Rhs, Solver};
use crate::state::{LayerState, DRY_DEPTH};

/// Negative depths above `-NEGATIVE_DEPTH_TOL` are clipped to zero; below
/// it the step aborts.
pub const NEGATIVE_DEPTH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    ForwardEuler,
    SspRk2,
}

impl fmt::Display for Integrator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Integrator::ForwardEuler => "forward-euler",
            Integrator::SspRk2 => "ssp-rk2",
        })
    }
}

impl FromStr for Integrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "forward-euler" => Ok(Integrator::ForwardEuler),
            "ssp-rk2" => Ok(Integrator::SspRk2),
            other => Err(Error::Input(format!("unknown integrator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeControls {
    pub cfl: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    pub viscous_safety: f64,
}

impl Default for TimeControls {
    fn default() -> Self {
        Self {
            cfl: 0.5,
            t_end: 1.0,
            integrator: Integrator::SspRk2,
            viscous_safety: 0.5,
        }
    }
}

impl TimeControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::Input(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.viscous_safety > 0.0 && self.viscous_safety <= 1.0) {
            return Err(Error::Input(format!(
                "viscous_safety must lie in (0, 1], got {}",
                self.viscous_safety
            )));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::Input(format!("t_end must be positive, got {}", self.t_end)));
        }
        Ok(())
    }
}

/// Largest `|u_alpha| + sqrt(g H)` over wet cells and layers; zero if all dry.
pub fn max_wave_speed(state: &LayerState, g: f64) -> f64 {
    let mut s: f64 = 0.0;
    for i in 0..state.n_cells() {
        let h = state.depth[i];
        if h <= DRY_DEPTH {
            continue;
        }
        let c = (g * h).sqrt();
        for u in &state.velocity {
            s = s.max(u[i].abs() + c);
        }
    }
    s
}

/// Stable explicit time step.
///
/// Advective limit `cfl dx / max(|u| + sqrt(gH))`; with viscosity, the
/// vertical limit `safety min(h_{alpha+1/2}^2) / (2 mu)` and the horizontal
/// limit `safety min(dx^2 / (4 mu), dx^4 / (4 mu H_max^2))` of the second-
/// and fourth-order horizontal viscous terms.
pub fn stable_dt(solver: &Solver, state: &LayerState, controls: &TimeControls) -> f64 {
    let g = solver.physics.gravity;
    let dx = solver.mesh.dx();
    let speed = max_wave_speed(state, g);
    let mut dt = if speed > 0.0 {
        controls.cfl * dx / speed
    } else {
        controls.cfl * dx / (g * DRY_DEPTH).sqrt()
    };
    let mu = solver.physics.viscosity();
    if mu > 0.0 {
        let part = &solver.partition;
        let mut min_gap2 = f64::INFINITY;
        let mut max_depth: f64 = 0.0;
        for h in &state.depth {
            if *h <= DRY_DEPTH {
                continue;
            }
            max_depth = max_depth.max(*h);
            for gap in gaps(part, *h) {
                min_gap2 = min_gap2.min(gap * gap);
            }
        }
        if min_gap2.is_finite() {
            dt = dt.min(controls.viscous_safety * min_gap2 / (2.0 * mu));
            let horizontal = (dx * dx / (4.0 * mu)).min(dx.powi(4) / (4.0 * mu * max_depth * max_depth));
            dt = dt.min(controls.viscous_safety * horizontal);
        }
    }
    dt
}

fn gaps(part: &LayerPartition, depth: f64) -> Vec<f64> {
    let h = part.thicknesses(depth);
    let n = h.len();
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.5 * h[0]);
    for k in 1..n {
        out.push(0.5 * (h[k - 1] + h[k]));
    }
    out.push(0.5 * h[n - 1]);
    out
}

/// Position of a step in a run, for abort diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepContext {
    pub step: usize,
    pub time: f64,
}

fn advance(state: &LayerState, rhs: &Rhs, dt: f64, part: &LayerPartition) -> (Vec<f64>, Vec<Vec<f64>>) {
    let q = state.discharges(part);
    let depth = state.depth.iter().zip(&rhs.depth).map(|(h, d)| h + dt * d).collect();
    let discharge = q
        .iter()
        .zip(&rhs.discharge)
        .map(|(q, d)| q.iter().zip(d).map(|(q, d)| q + dt * d).collect())
        .collect();
    (depth, discharge)
}

/// Clips round-off negative depths, zeroes dry momentum and re-derives
/// velocities.
fn finish_stage(
    mut depth: Vec<f64>,
    mut discharge: Vec<Vec<f64>>,
    part: &LayerPartition,
    ctx: StepContext,
) -> Result<LayerState> {
    for i in 0..depth.len() {
        let h = depth[i];
        if !h.is_finite() || discharge.iter().any(|q| !q[i].is_finite()) {
            return Err(abort(ctx, i, "non-finite value"));
        }
        if h < -NEGATIVE_DEPTH_TOL {
            return Err(abort(ctx, i, &format!("negative depth {h:e}")));
        }
        if h < 0.0 {
            depth[i] = 0.0;
        }
        if depth[i] <= DRY_DEPTH {
            for q in &mut discharge {
                q[i] = 0.0;
            }
        }
    }
    Ok(LayerState::from_conservative(depth, &discharge, part))
}

fn abort(ctx: StepContext, cell: usize, reason: &str) -> Error {
    Error::SolverAbort {
        step: ctx.step,
        time: ctx.time,
        cell,
        reason: reason.to_string(),
    }
}

/// One explicit step of size `dt`.
pub fn step<F>(
    state: &LayerState,
    dt: f64,
    part: &LayerPartition,
    integrator: Integrator,
    ctx: StepContext,
    mut rhs: F,
) -> Result<LayerState>
where
    F: FnMut(&LayerState) -> Result<Rhs>,
{
    let r0 = rhs(state)?;
    let (h1, q1) = advance(state, &r0, dt, part);
    let s1 = finish_stage(h1, q1, part, ctx)?;
    match integrator {
        Integrator::ForwardEuler => Ok(s1),
        Integrator::SspRk2 => {
            let r1 = rhs(&s1)?;
            let (h2, q2) = advance(&s1, &r1, dt, part);
            let q0 = state.discharges(part);
            let depth = state.depth.iter().zip(&h2).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
            let discharge = q0
                .iter()
                .zip(&q2)
                .map(|(a, b)| a.iter().zip(b).map(|(a, b)| 0.5 * a + 0.5 * b).collect())
                .collect();
            finish_stage(depth, discharge, part, ctx)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    /// Relative change of the integrated depth.
    pub mass_drift: f64,
    pub min_depth: f64,
    /// Relative change of the total energy.
    pub energy_drift: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub state: LayerState,
    pub energy: Vec<EnergySample>,
    pub dts: Vec<f64>,
    pub summary: RunSummary,
}

/// Hooks called during [`run`].
pub trait Observer {
    fn on_step(&mut self, _step: usize, _time: f64, _dt: f64, _state: &LayerState, _energy: &EnergySample) -> Result<()> {
        Ok(())
    }
}

impl Observer for () {}

/// Optional limits for [`run`].
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub max_steps: Option<usize>,
    /// Times the integration must land on exactly (snapshot times).
    pub stops: Vec<f64>,
}

/// Advances `initial` to `controls.t_end`, sampling the energy budget at
/// every step (including the initial and final states).
pub fn run<O: Observer>(
    solver: &Solver,
    initial: LayerState,
    controls: &TimeControls,
    options: &RunOptions,
    observer: &mut O,
) -> Result<RunOutput> {
    controls.validate()?;
    initial.check_layers(&solver.partition)?;
    let mut stops: Vec<f64> = options.stops.iter().copied().filter(|t| *t > 0.0 && *t < controls.t_end).collect();
    stops.push(controls.t_end);
    stops.sort_by(f64::total_cmp);
    let mut next_stop = 0;

    let mut state = initial;
    let mut time = 0.0;
    let mut steps = 0;
    let mut energy = Vec::new();
    let mut dts = Vec::new();
    let mut min_depth = state.depth.iter().cloned().fold(f64::INFINITY, f64::min);

    let eval = solver.evaluate(&state)?;
    let first = sample(solver, &state, &eval, time);
    energy.push(first);
    observer.on_step(0, time, 0.0, &state, &first)?;

    while time < controls.t_end && options.max_steps.map_or(true, |m| steps < m) {
        while stops[next_stop] <= time {
            next_stop += 1;
        }
        let target = stops[next_stop];
        let mut dt = stable_dt(solver, &state, controls);
        let lands = time + dt >= target;
        if lands {
            dt = target - time;
        }
        let ctx = StepContext { step: steps + 1, time };
        state = step(&state, dt, &solver.partition, controls.integrator, ctx, |s| solver.rhs(s))?;
        steps += 1;
        time = if lands { target } else { time + dt };
        dts.push(dt);
        min_depth = state.depth.iter().cloned().fold(min_depth, f64::min);
        let eval = solver.evaluate(&state)?;
        let e = sample(solver, &state, &eval, time);
        energy.push(e);
        observer.on_step(steps, time, dt, &state, &e)?;
    }

    let last = energy.last().copied().unwrap_or(first);
    Ok(RunOutput {
        state,
        summary: RunSummary {
            steps,
            final_time: time,
            mass_drift: relative_change(first.mass, last.mass),
            min_depth,
            energy_drift: relative_change(first.total, last.total),
        },
        energy,
        dts,
    })
}

pub fn relative_change(from: f64, to: f64) -> f64 {
    if from != 0.0 {
        (to - from) / from.abs()
    } else {
        to - from
    }
}

/// Advances with a fixed step `dt` for `n_steps` steps.
pub fn run_fixed(solver: &Solver, initial: LayerState, dt: f64, n_steps: usize, integrator: Integrator) -> Result<LayerState> {
    let mut state = initial;
    for n in 0..n_steps {
        let ctx = StepContext {
            step: n + 1,
            time: n as f64 * dt,
        };
        state = step(&state, dt, &solver.partition, integrator, ctx, |s| solver.rhs(s))?;
    }
    Ok(state)
}
