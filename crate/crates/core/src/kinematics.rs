//! Diagnostic vertical velocities.
//!
//! Derivatives of products are expanded with the product rule onto centred
//! differences of the primitive fields (`u_alpha`, `H`, `z_b`). The layer-mean
//! identity between the affine profile and the layer values is algebraic, so
//! it survives discretisation only when every route uses this same expansion.

use crate::geometry::InterfaceGeometry;
use crate::mesh::Diff;
use crate::state::LayerState;

#[derive(Debug, Clone, PartialEq)]
pub struct VerticalField {
    /// Layer-mean vertical velocity `w_alpha`, `[layer][cell]`.
    pub w: Vec<Vec<f64>>,
    /// Offsets `k_alpha` of the affine profile `k_alpha - z du_alpha/dx`.
    pub offset: Vec<Vec<f64>>,
    /// `du_alpha/dx`.
    pub du_dx: Vec<Vec<f64>>,
}

impl VerticalField {
    /// Value of the piecewise-affine profile inside layer `layer` at height `z`.
    pub fn profile(&self, layer: usize, cell: usize, z: f64) -> f64 {
        self.offset[layer][cell] - z * self.du_dx[layer][cell]
    }

    /// Exact integral of the affine profile over layer `layer`.
    pub fn layer_integral(&self, geom: &InterfaceGeometry, layer: usize, cell: usize) -> f64 {
        let lo = geom.interfaces[layer][cell];
        let hi = geom.interfaces[layer + 1][cell];
        self.offset[layer][cell] * (hi - lo) - self.du_dx[layer][cell] * 0.5 * (hi * hi - lo * lo)
    }
}

/// `d(h_alpha u_alpha)/dx` for every layer.
pub fn layer_flux_divergence(state: &LayerState, geom: &InterfaceGeometry, du_dx: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..state.n_layers())
        .map(|a| {
            (0..state.n_cells())
                .map(|i| {
                    geom.thickness_slopes[a][i] * state.velocity[a][i]
                        + geom.thickness[a][i] * du_dx[a][i]
                })
                .collect()
        })
        .collect()
}

pub fn velocity_gradients(state: &LayerState, diff: &Diff) -> Vec<Vec<f64>> {
    state.velocity.iter().map(|u| diff.first(u)).collect()
}

/// `w_alpha = -1/2 d(h_alpha u_alpha)/dx - sum_{j<alpha} d(h_j u_j)/dx + u_alpha dz_alpha/dx`.
pub fn reconstruct_w(state: &LayerState, geom: &InterfaceGeometry, diff: &Diff) -> Vec<Vec<f64>> {
    let du = velocity_gradients(state, diff);
    reconstruct_w_with(state, geom, &du)
}

fn reconstruct_w_with(state: &LayerState, geom: &InterfaceGeometry, du: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let div = layer_flux_divergence(state, geom, du);
    let n_cells = state.n_cells();
    let mut w = vec![vec![0.0; n_cells]; state.n_layers()];
    for i in 0..n_cells {
        let mut below = 0.0;
        for a in 0..state.n_layers() {
            w[a][i] = -0.5 * div[a][i] - below + state.velocity[a][i] * geom.midpoint_slopes[a][i];
            below += div[a][i];
        }
    }
    w
}

/// Offsets of the affine profile: `k_1 = d(z_b u_1)/dx`,
/// `k_{alpha+1} = k_alpha + d(z_{alpha+1/2} (u_{alpha+1} - u_alpha))/dx`.
pub fn what_coefficients(state: &LayerState, geom: &InterfaceGeometry, diff: &Diff) -> Vec<Vec<f64>> {
    let du = velocity_gradients(state, diff);
    offsets_with(state, geom, &du)
}

fn offsets_with(state: &LayerState, geom: &InterfaceGeometry, du: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n_cells = state.n_cells();
    let n = state.n_layers();
    let u = &state.velocity;
    let mut k = vec![vec![0.0; n_cells]; n];
    for i in 0..n_cells {
        let zb = geom.interfaces[0][i];
        let mut acc = geom.interface_slopes[0][i] * u[0][i] + zb * du[0][i];
        k[0][i] = acc;
        for a in 1..n {
            let jump = u[a][i] - u[a - 1][i];
            let djump = du[a][i] - du[a - 1][i];
            acc += geom.interface_slopes[a][i] * jump + geom.interfaces[a][i] * djump;
            k[a][i] = acc;
        }
    }
    k
}

pub fn vertical_field(state: &LayerState, geom: &InterfaceGeometry, diff: &Diff) -> VerticalField {
    let du_dx = velocity_gradients(state, diff);
    let w = reconstruct_w_with(state, geom, &du_dx);
    let offset = offsets_with(state, geom, &du_dx);
    VerticalField { w, offset, du_dx }
}
