//! Energy diagnostics: layer energies, exchange and viscous dissipation, and
//! the discrete budget residual along a trajectory. Never fed back into the
//! dynamics.

use crate::geometry::{InterfaceGeometry, LayerPartition};
use crate::mesh::{BoundaryKind, Mesh};
use crate::rheology::{Placement, StressField};
use crate::solver::{Evaluation, Solver};
use crate::state::{hydrostatic_pressures, ExchangeFluxes, LayerState};

/// `E_alpha = h_alpha (u_alpha^2 / 2 + g z_alpha)` per layer and cell.
pub fn layer_energies(state: &LayerState, geom: &InterfaceGeometry, g: f64) -> Vec<Vec<f64>> {
    (0..state.n_layers())
        .map(|a| {
            (0..state.n_cells())
                .map(|i| {
                    let u = state.velocity[a][i];
                    geom.thickness[a][i] * (0.5 * u * u + g * geom.midpoints[a][i])
                })
                .collect()
        })
        .collect()
}

/// Mesh integral of the summed layer energies.
pub fn total_energy(energies: &[Vec<f64>], dx: f64) -> f64 {
    let n_cells = energies.first().map_or(0, Vec::len);
    (0..n_cells).map(|i| energies.iter().map(|e| e[i]).sum::<f64>()).sum::<f64>() * dx
}

/// Energy exchanged through one interface by the mass exchange `rate` when
/// the exchanged momentum is carried with velocity `carried`.
pub fn interface_exchange_energy(u_lower: f64, u_upper: f64, carried: f64, rate: f64) -> f64 {
    (carried * (u_lower - u_upper) - 0.5 * u_lower * u_lower + 0.5 * u_upper * u_upper) * rate
}

/// Per-cell exchange dissipation `-1/2 sum (u_{alpha+1} - u_alpha)^2 |G_{alpha+1/2}|`.
pub fn exchange_dissipation(state: &LayerState, exchange: &ExchangeFluxes) -> Vec<f64> {
    let n = state.n_layers();
    (0..state.n_cells())
        .map(|i| {
            (1..n)
                .map(|k| {
                    let du = state.velocity[k][i] - state.velocity[k - 1][i];
                    -0.5 * du * du * exchange.rate[k][i].abs()
                })
                .sum()
        })
        .collect()
}

/// Per-cell friction dissipation `-kappa u_1^2 / c_b^3 = -sigma_{1/2} u_1`.
pub fn friction_dissipation(state: &LayerState, stress: &StressField) -> Vec<f64> {
    (0..state.n_cells())
        .map(|i| -stress.traction[0][i] * state.velocity[0][i])
        .collect()
}

/// Per-cell Newtonian dissipation (without friction), in its compact form:
/// a weighted sum of squared stresses at interfaces or in layers.
pub fn newtonian_dissipation(
    stress: &StressField,
    geom: &InterfaceGeometry,
    viscosity: f64,
    placement: Placement,
) -> Vec<f64> {
    let n_cells = geom.n_cells();
    match placement {
        Placement::Interface => (0..n_cells)
            .map(|i| {
                -(0..stress.interface_xx.len())
                    .map(|k| {
                        let (xx, zx) = (stress.interface_xx[k][i], stress.interface_zx[k][i]);
                        geom.gaps[k][i] / viscosity * (xx * xx + zx * zx)
                    })
                    .sum::<f64>()
            })
            .collect(),
        Placement::Layer => (0..n_cells)
            .map(|i| {
                -(0..stress.layer_xx.len())
                    .map(|a| {
                        let (xx, zx) = (stress.layer_xx[a][i], stress.layer_zx[a][i]);
                        geom.thickness[a][i] / viscosity * (xx * xx + zx * zx)
                    })
                    .sum::<f64>()
            })
            .collect(),
    }
}

/// Net inviscid energy inflow `F(x_min) - F(x_max)` with
/// `F = sum u_alpha (E_alpha + h_alpha p_alpha)`. Zero for periodic and wall
/// boundaries.
pub fn boundary_inflow(
    mesh: &Mesh,
    part: &LayerPartition,
    state: &LayerState,
    geom: &InterfaceGeometry,
    energies: &[Vec<f64>],
    g: f64,
) -> f64 {
    if mesh.boundary != BoundaryKind::Transmissive {
        return 0.0;
    }
    let p = hydrostatic_pressures(state, part, g);
    let flux = |i: usize| -> f64 {
        (0..state.n_layers())
            .map(|a| state.velocity[a][i] * (energies[a][i] + geom.thickness[a][i] * p.layer[a][i]))
            .sum()
    };
    flux(0) - flux(mesh.n_cells - 1)
}

/// Energy diagnostics of one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub time: f64,
    pub total: f64,
    /// Integrated exchange dissipation (`<= 0`).
    pub exchange: f64,
    /// Integrated viscous dissipation (`<= 0`), friction excluded.
    pub viscous: f64,
    /// Integrated friction dissipation (`<= 0`).
    pub friction: f64,
    pub inflow: f64,
    pub mass: f64,
}

pub fn sample(solver: &Solver, state: &LayerState, eval: &Evaluation, time: f64) -> EnergySample {
    let dx = solver.mesh.dx();
    let g = solver.physics.gravity;
    let energies = layer_energies(state, &eval.geometry, g);
    let integral = |v: Vec<f64>| v.iter().sum::<f64>() * dx;
    let viscous = match &solver.physics.rheology {
        Some(model) => integral(newtonian_dissipation(
            &eval.stress,
            &eval.geometry,
            model.viscosity(),
            model.placement,
        )),
        None => 0.0,
    };
    EnergySample {
        time,
        total: total_energy(&energies, dx),
        exchange: integral(exchange_dissipation(state, &eval.euler.exchange)),
        viscous,
        friction: integral(friction_dissipation(state, &eval.stress)),
        inflow: boundary_inflow(&solver.mesh, &solver.partition, state, &eval.geometry, &energies, g),
        mass: state.depth.iter().sum::<f64>() * dx,
    }
}

/// `[E(t_{n+1}) - E(t_n)] / dt - inflow - D_G - R_E - friction`, with the
/// source terms taken at `t_n`. One entry per step.
pub fn budget_residuals(samples: &[EnergySample]) -> Vec<f64> {
    samples
        .windows(2)
        .map(|w| {
            let dt = w[1].time - w[0].time;
            (w[1].total - w[0].total) / dt - w[0].inflow - w[0].exchange - w[0].viscous - w[0].friction
        })
        .collect()
}
