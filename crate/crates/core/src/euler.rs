//! Semi-discrete right-hand side of the layer-averaged Euler system.
//!
//! First-order finite volumes: one HLL flux per layer sharing a single wave
//! fan, hydrostatic reconstruction of the depth at every edge for
//! well-balancing, and cell-centred momentum exchange between layers.

use crate::error::{Error, Result};
use crate::geometry::{Bathymetry, LayerPartition};
use crate::mesh::{BoundaryKind, Mesh};
use crate::state::{exchange_fluxes, ExchangeFluxes, LayerState};

/// Depth and layer velocities on one side of an edge.
#[derive(Debug, Clone, Copy)]
pub struct Trace<'a> {
    pub depth: f64,
    pub velocity: &'a [f64],
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LayerFlux {
    pub mass: f64,
    pub momentum: f64,
}

/// Exact flux `(h u, h u^2 + g h H / 2)` of layer `layer` for a given trace.
pub fn exact_flux(trace: &Trace<'_>, layer: usize, part: &LayerPartition, g: f64) -> LayerFlux {
    let h = part.fraction(layer) * trace.depth;
    let u = trace.velocity[layer];
    LayerFlux {
        mass: h * u,
        momentum: h * u * u + 0.5 * g * h * trace.depth,
    }
}

/// Shared wave-speed bounds `(s_min, s_max)` over every layer of both traces.
pub fn wave_speeds(left: &Trace<'_>, right: &Trace<'_>, g: f64) -> (f64, f64) {
    let mut s_min = f64::INFINITY;
    let mut s_max = f64::NEG_INFINITY;
    for t in [left, right] {
        let c = (g * t.depth).sqrt();
        for u in t.velocity {
            s_min = s_min.min(u - c);
            s_max = s_max.max(u + c);
        }
    }
    (s_min, s_max)
}

/// Per-layer HLL flux between two reconstructed traces.
pub fn numerical_flux(
    left: &Trace<'_>,
    right: &Trace<'_>,
    part: &LayerPartition,
    g: f64,
) -> Result<Vec<LayerFlux>> {
    let n = part.n_layers();
    if left.velocity.len() != n || right.velocity.len() != n {
        return Err(Error::LayerMismatch {
            expected: n,
            got: left.velocity.len().min(right.velocity.len()),
        });
    }
    let finite = |t: &Trace<'_>| t.depth.is_finite() && t.velocity.iter().all(|u| u.is_finite());
    if !finite(left) || !finite(right) {
        return Err(Error::NonFiniteTrace { interface: usize::MAX });
    }
    if left.depth <= 0.0 && right.depth <= 0.0 {
        return Ok(vec![LayerFlux::default(); n]);
    }
    let (s_min, s_max) = wave_speeds(left, right, g);
    let fluxes = (0..n)
        .map(|a| {
            let fl = exact_flux(left, a, part, g);
            let fr = exact_flux(right, a, part, g);
            if s_min >= 0.0 {
                return fl;
            }
            if s_max <= 0.0 {
                return fr;
            }
            let l = part.fraction(a);
            let (hl, hr) = (l * left.depth, l * right.depth);
            let (ql, qr) = (hl * left.velocity[a], hr * right.velocity[a]);
            let inv = 1.0 / (s_max - s_min);
            let prod = s_max * s_min;
            LayerFlux {
                mass: (s_max * fl.mass - s_min * fr.mass + prod * (hr - hl)) * inv,
                momentum: (s_max * fl.momentum - s_min * fr.momentum + prod * (qr - ql)) * inv,
            }
        })
        .collect();
    Ok(fluxes)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EulerRhs {
    /// `dH/dt`
    pub depth: Vec<f64>,
    /// `dq_alpha/dt`, `[layer][cell]`
    pub discharge: Vec<Vec<f64>>,
    /// Discrete divergence of each layer's mass flux.
    pub mass_divergence: Vec<Vec<f64>>,
    pub exchange: ExchangeFluxes,
}

struct Column {
    depth: f64,
    bottom: f64,
    velocity: Vec<f64>,
}

fn column(state: &LayerState, bathy: &Bathymetry, i: usize, negate: bool) -> Column {
    let sign = if negate { -1.0 } else { 1.0 };
    Column {
        depth: state.depth[i],
        bottom: bathy.elevation[i],
        velocity: state.velocity.iter().map(|u| sign * u[i]).collect(),
    }
}

/// Left and right columns of edge `j` (between cells `j - 1` and `j`).
fn edge_columns(mesh: &Mesh, state: &LayerState, bathy: &Bathymetry, j: usize) -> (Column, Column) {
    let n = mesh.n_cells;
    let ghost = |inner: usize| match mesh.boundary {
        BoundaryKind::Wall => column(state, bathy, inner, true),
        _ => column(state, bathy, inner, false),
    };
    if j == 0 {
        let right = column(state, bathy, 0, false);
        let left = if mesh.is_periodic() {
            column(state, bathy, n - 1, false)
        } else {
            ghost(0)
        };
        (left, right)
    } else if j == n {
        let left = column(state, bathy, n - 1, false);
        let right = if mesh.is_periodic() {
            column(state, bathy, 0, false)
        } else {
            ghost(n - 1)
        };
        (left, right)
    } else {
        (column(state, bathy, j - 1, false), column(state, bathy, j, false))
    }
}

/// Fluxes at one edge after hydrostatic reconstruction. The momentum flux
/// seen by each neighbour carries its own pressure correction.
struct EdgeFlux {
    mass: Vec<f64>,
    momentum_to_left: Vec<f64>,
    momentum_to_right: Vec<f64>,
}

fn edge_flux(left: &Column, right: &Column, part: &LayerPartition, g: f64, edge: usize) -> Result<EdgeFlux> {
    let bottom = left.bottom.max(right.bottom);
    let hl = (left.depth + left.bottom - bottom).max(0.0);
    let hr = (right.depth + right.bottom - bottom).max(0.0);
    let fluxes = numerical_flux(
        &Trace { depth: hl, velocity: &left.velocity },
        &Trace { depth: hr, velocity: &right.velocity },
        part,
        g,
    )
    .map_err(|e| match e {
        Error::NonFiniteTrace { .. } => Error::NonFiniteTrace { interface: edge },
        other => other,
    })?;
    let corr_l = 0.5 * g * (left.depth * left.depth - hl * hl);
    let corr_r = 0.5 * g * (right.depth * right.depth - hr * hr);
    let mut out = EdgeFlux {
        mass: Vec::with_capacity(fluxes.len()),
        momentum_to_left: Vec::with_capacity(fluxes.len()),
        momentum_to_right: Vec::with_capacity(fluxes.len()),
    };
    for (a, f) in fluxes.iter().enumerate() {
        let l = part.fraction(a);
        out.mass.push(f.mass);
        out.momentum_to_left.push(f.momentum + l * corr_l);
        out.momentum_to_right.push(f.momentum + l * corr_r);
    }
    Ok(out)
}

pub fn euler_rhs(
    mesh: &Mesh,
    state: &LayerState,
    bathy: &Bathymetry,
    part: &LayerPartition,
    g: f64,
) -> Result<EulerRhs> {
    state.check_layers(part)?;
    let n_cells = mesh.n_cells;
    let n = part.n_layers();
    if state.n_cells() != n_cells {
        return Err(Error::Input(format!(
            "state has {} cells, mesh has {n_cells}",
            state.n_cells()
        )));
    }
    let inv_dx = 1.0 / mesh.dx();

    let mut edges = Vec::with_capacity(n_cells + 1);
    let n_edges = if mesh.is_periodic() { n_cells } else { n_cells + 1 };
    for j in 0..n_edges {
        let (l, r) = edge_columns(mesh, state, bathy, j);
        edges.push(edge_flux(&l, &r, part, g, j)?);
    }
    let right_edge = |i: usize| if mesh.is_periodic() { (i + 1) % n_cells } else { i + 1 };

    let mut mass_divergence = vec![vec![0.0; n_cells]; n];
    let mut discharge = vec![vec![0.0; n_cells]; n];
    for i in 0..n_cells {
        let (west, east) = (&edges[i], &edges[right_edge(i)]);
        for a in 0..n {
            mass_divergence[a][i] = (east.mass[a] - west.mass[a]) * inv_dx;
            discharge[a][i] = -(east.momentum_to_left[a] - west.momentum_to_right[a]) * inv_dx;
        }
    }
    let depth = (0..n_cells)
        .map(|i| -mass_divergence.iter().map(|d| d[i]).sum::<f64>())
        .collect();

    let exchange = exchange_fluxes(state, &mass_divergence, part)?;
    for i in 0..n_cells {
        for a in 0..n {
            let upper = exchange.velocity[a + 1][i] * exchange.rate[a + 1][i];
            let lower = exchange.velocity[a][i] * exchange.rate[a][i];
            discharge[a][i] += upper - lower;
        }
    }

    Ok(EulerRhs {
        depth,
        discharge,
        mass_divergence,
        exchange,
    })
}
