//! Runs a parsed scenario end to end, writing snapshots, the energy series
//! and progress lines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::energy::{sample, EnergySample};
use crate::error::{Error, Result};
use crate::output::{energy_csv, write_snapshot};
use crate::scenario::{Scenario, SolverKind};
use crate::solver::Solver;
use crate::state::LayerState;
use crate::sv_reference::SvState;
use crate::time_loop::{relative_change, run, Integrator, Observer, RunOptions, RunSummary};

/// Where and how often to write output.
#[derive(Debug, Clone)]
pub struct OutputPlan {
    pub directory: PathBuf,
    /// `None`: initial and final snapshots only.
    pub snapshot_every: Option<f64>,
    /// Print a progress line every this many steps (and at snapshots).
    pub progress_every: usize,
}

impl OutputPlan {
    pub fn from_scenario(s: &Scenario) -> Self {
        Self {
            directory: PathBuf::from(&s.directory),
            snapshot_every: s.snapshot_every,
            progress_every: 100,
        }
    }

    fn stops(&self, t_end: f64) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(every) = self.snapshot_every {
            let mut k = 1usize;
            loop {
                let t = k as f64 * every;
                if t >= t_end {
                    break;
                }
                out.push(t);
                k += 1;
            }
        }
        out
    }
}

struct Writer<'a, E: Write> {
    solver: &'a Solver,
    plan: &'a OutputPlan,
    stops: Vec<f64>,
    t_end: f64,
    next_snapshot: usize,
    log: E,
}

impl<E: Write> Writer<'_, E> {
    fn snapshot_path(&self, index: usize) -> PathBuf {
        snapshot_file(&self.plan.directory, index)
    }

    fn record(&mut self, step: usize, time: f64, dt: f64, state: &LayerState, e: &EnergySample) -> Result<()> {
        let at_stop = step == 0 || time == self.t_end || self.stops.contains(&time);
        if at_stop {
            write_snapshot(self.solver, state, &self.snapshot_path(self.next_snapshot))?;
            self.next_snapshot += 1;
        }
        if at_stop || step % self.plan.progress_every.max(1) == 0 {
            writeln!(
                self.log,
                "step {step} t {time:.6e} dt {dt:.6e} mass {:.16e} energy {:.16e}",
                e.mass, e.total
            )?;
        }
        Ok(())
    }
}

impl<E: Write> Observer for Writer<'_, E> {
    fn on_step(&mut self, step: usize, time: f64, dt: f64, state: &LayerState, e: &EnergySample) -> Result<()> {
        self.record(step, time, dt, state, e)
    }
}

/// Runs the scenario, writing `snapshot_NNNNN.csv` and `energy.csv` into the
/// plan's directory and progress lines to `log`.
pub fn run_scenario<E: Write>(scenario: &Scenario, plan: &OutputPlan, log: E) -> Result<RunSummary> {
    fs::create_dir_all(&plan.directory)?;
    let solver = scenario.solver()?;
    let controls = scenario.controls;
    let stops = plan.stops(controls.t_end);
    let mut writer = Writer {
        solver: &solver,
        plan,
        stops: stops.clone(),
        t_end: controls.t_end,
        next_snapshot: 0,
        log,
    };
    let (summary, energy) = match scenario.solver {
        SolverKind::Multilayer => {
            let options = RunOptions { max_steps: None, stops };
            let out = run(&solver, scenario.initial_state()?, &controls, &options, &mut writer)?;
            (out.summary, out.energy)
        }
        SolverKind::Sv1 => run_single_layer(scenario, &solver, &stops, &mut writer)?,
    };
    fs::write(plan.directory.join("energy.csv"), energy_csv(&energy))?;
    Ok(summary)
}

/// Time loop of the single-layer reference solver; diagnostics go through
/// the multilayer evaluation of the equivalent one-layer state.
fn run_single_layer<E: Write>(
    scenario: &Scenario,
    solver: &Solver,
    stops: &[f64],
    writer: &mut Writer<'_, E>,
) -> Result<(RunSummary, Vec<EnergySample>)> {
    let model = scenario.sv_model()?;
    let controls = scenario.controls;
    let mut state = scenario.sv_initial_state()?;
    let as_layers = |s: &SvState| LayerState::new(s.depth.clone(), vec![s.velocity.clone()]);
    let sample_of = |s: &SvState, t: f64| -> Result<(LayerState, EnergySample)> {
        let ls = as_layers(s)?;
        let eval = solver.evaluate(&ls)?;
        let e = sample(solver, &ls, &eval, t);
        Ok((ls, e))
    };

    let mut targets: Vec<f64> = stops.to_vec();
    targets.push(controls.t_end);
    let mut next = 0;
    let mut time = 0.0;
    let mut steps = 0;
    let mut min_depth = state.depth.iter().cloned().fold(f64::INFINITY, f64::min);
    let (ls, first) = sample_of(&state, time)?;
    writer.record(0, time, 0.0, &ls, &first)?;
    let mut energy = vec![first];
    while time < controls.t_end {
        while targets[next] <= time {
            next += 1;
        }
        let mut dt = model.stable_dt(&state, controls.cfl, controls.viscous_safety);
        let lands = time + dt >= targets[next];
        if lands {
            dt = targets[next] - time;
        }
        state = match controls.integrator {
            Integrator::ForwardEuler => model.euler_step(&state, dt),
            Integrator::SspRk2 => model.ssp_rk2_step(&state, dt),
        }
        .map_err(|e| match e {
            Error::SolverAbort { cell, reason, .. } => Error::SolverAbort {
                step: steps + 1,
                time,
                cell,
                reason,
            },
            other => other,
        })?;
        steps += 1;
        time = if lands { targets[next] } else { time + dt };
        min_depth = state.depth.iter().cloned().fold(min_depth, f64::min);
        let (ls, e) = sample_of(&state, time)?;
        writer.record(steps, time, dt, &ls, &e)?;
        energy.push(e);
    }
    let last = *energy.last().unwrap_or(&first);
    Ok((
        RunSummary {
            steps,
            final_time: time,
            mass_drift: relative_change(first.mass, last.mass),
            min_depth,
            energy_drift: relative_change(first.total, last.total),
        },
        energy,
    ))
}

/// Path of snapshot `index` inside `dir`.
pub fn snapshot_file(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("snapshot_{index:05}.csv"))
}
