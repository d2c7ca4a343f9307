//! Vertical layer decomposition of the water column.
//!
//! Layers are fixed fractions of the local depth. Interface `k` (for
//! `k = 0..=N`) sits between layer `k - 1` and layer `k`; interface 0 is the
//! bottom and interface `N` the free surface. Layer and interface fields are
//! stored layer-major: `field[layer][cell]`.

use crate::error::{Error, Result};
use crate::mesh::{Diff, Mesh};

/// Tolerance on the sum of layer fractions.
pub const FRACTION_SUM_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct LayerPartition {
    fractions: Vec<f64>,
    /// `cumulative[k] = sum_{j<k} l_j`, with `cumulative[N] = 1` exactly.
    cumulative: Vec<f64>,
}

impl LayerPartition {
    pub fn new(fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::Partition("at least one layer is required".into()));
        }
        if let Some(bad) = fractions.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::Partition(format!("fraction {bad} is not positive")));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > FRACTION_SUM_TOL {
            return Err(Error::Partition(format!("fractions sum {sum} ≠ 1")));
        }
        let n = fractions.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cumulative.push(0.0);
        for l in &fractions[..n - 1] {
            acc += l;
            cumulative.push(acc);
        }
        cumulative.push(1.0);
        Ok(Self { fractions, cumulative })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Partition("at least one layer is required".into()));
        }
        let l = 1.0 / n as f64;
        let mut fractions = vec![l; n];
        // absorb the rounding of n * (1/n) in the last layer
        let head: f64 = fractions[..n - 1].iter().sum();
        fractions[n - 1] = 1.0 - head;
        Self::new(fractions)
    }

    pub fn n_layers(&self) -> usize {
        self.fractions.len()
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    pub fn fraction(&self, layer: usize) -> f64 {
        self.fractions[layer]
    }

    /// Fraction of the column below interface `k`.
    pub fn below(&self, interface: usize) -> f64 {
        self.cumulative[interface]
    }

    /// Per-layer thicknesses of a column of depth `depth`; the top layer takes
    /// the remainder so the thicknesses sum to `depth` up to one rounding.
    pub fn thicknesses(&self, depth: f64) -> Vec<f64> {
        let n = self.n_layers();
        let mut h = Vec::with_capacity(n);
        let mut acc = 0.0;
        for l in &self.fractions[..n - 1] {
            let hj = l * depth;
            acc += hj;
            h.push(hj);
        }
        h.push(depth - acc);
        h
    }

    /// Partition obtained by merging layers `layer` and `layer + 1`.
    pub fn merge(&self, layer: usize) -> Result<Self> {
        if layer + 1 >= self.n_layers() {
            return Err(Error::Partition(format!("cannot merge layer {layer} with the one above")));
        }
        let mut f = self.fractions.clone();
        let upper = f.remove(layer + 1);
        f[layer] += upper;
        Self::new(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bathymetry {
    pub elevation: Vec<f64>,
    pub slope: Vec<f64>,
    pub cosine: Vec<f64>,
}

impl Bathymetry {
    pub fn new(mesh: &Mesh, elevation: Vec<f64>) -> Result<Self> {
        if elevation.len() != mesh.n_cells {
            return Err(Error::Input(format!(
                "bathymetry has {} values for {} cells",
                elevation.len(),
                mesh.n_cells
            )));
        }
        if let Some(i) = elevation.iter().position(|z| !z.is_finite()) {
            return Err(Error::Input(format!("non-finite bathymetry in cell {i}")));
        }
        let slope = mesh.diff().first(&elevation);
        let cosine = slope.iter().map(|s| 1.0 / (1.0 + s * s).sqrt()).collect();
        Ok(Self { elevation, slope, cosine })
    }

    pub fn flat(mesh: &Mesh, level: f64) -> Self {
        Self::new(mesh, vec![level; mesh.n_cells]).expect("finite flat bathymetry")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceGeometry {
    /// `z_{k}` for interfaces `k = 0..=N` (bottom to surface).
    pub interfaces: Vec<Vec<f64>>,
    /// Layer midpoints `z_alpha`.
    pub midpoints: Vec<Vec<f64>>,
    /// Layer thicknesses `h_alpha`.
    pub thickness: Vec<Vec<f64>>,
    /// Midpoint gaps at each interface; the bottom and surface entries are
    /// half the adjacent layer thickness.
    pub gaps: Vec<Vec<f64>>,
    /// `dz/dx` at each interface.
    pub interface_slopes: Vec<Vec<f64>>,
    /// `1 / sqrt(1 + slope^2)` at each interface.
    pub interface_cosines: Vec<Vec<f64>>,
    /// `dz_alpha/dx` at each layer midpoint.
    pub midpoint_slopes: Vec<Vec<f64>>,
    /// `dh_alpha/dx`.
    pub thickness_slopes: Vec<Vec<f64>>,
    /// `dH/dx`.
    pub depth_slope: Vec<f64>,
}

impl InterfaceGeometry {
    pub fn n_layers(&self) -> usize {
        self.thickness.len()
    }

    pub fn n_cells(&self) -> usize {
        self.depth_slope.len()
    }
}

/// Builds every vertical-geometry quantity of the layer decomposition.
///
/// Slopes are centred differences of the depth and bathymetry combined
/// linearly, which equals differencing each interface elevation directly.
pub fn build_geometry(
    mesh: &Mesh,
    depth: &[f64],
    bathy: &Bathymetry,
    part: &LayerPartition,
) -> Result<InterfaceGeometry> {
    let n_cells = mesh.n_cells;
    if depth.len() != n_cells || bathy.elevation.len() != n_cells {
        return Err(Error::Input(format!(
            "field lengths {} / {} do not match {n_cells} cells",
            depth.len(),
            bathy.elevation.len()
        )));
    }
    if let Some(i) = depth.iter().position(|h| !h.is_finite()) {
        return Err(Error::Input(format!("non-finite depth in cell {i}")));
    }
    if let Some(i) = depth.iter().position(|h| *h < 0.0) {
        return Err(Error::Input(format!("negative depth {} in cell {i}", depth[i])));
    }
    let n = part.n_layers();
    let diff: Diff = mesh.diff();

    let mut interfaces = vec![vec![0.0; n_cells]; n + 1];
    let mut midpoints = vec![vec![0.0; n_cells]; n];
    let mut thickness = vec![vec![0.0; n_cells]; n];
    let mut gaps = vec![vec![0.0; n_cells]; n + 1];

    for i in 0..n_cells {
        let zb = bathy.elevation[i];
        let h = part.thicknesses(depth[i]);
        let mut z = zb;
        interfaces[0][i] = zb;
        for a in 0..n {
            let lower = z;
            z = if a + 1 == n { zb + depth[i] } else { z + h[a] };
            interfaces[a + 1][i] = z;
            thickness[a][i] = h[a];
            midpoints[a][i] = 0.5 * (lower + z);
        }
        gaps[0][i] = 0.5 * h[0];
        for k in 1..n {
            gaps[k][i] = 0.5 * (h[k - 1] + h[k]);
        }
        gaps[n][i] = 0.5 * h[n - 1];
    }

    let depth_slope = diff.first(depth);
    let mut interface_slopes = vec![vec![0.0; n_cells]; n + 1];
    let mut interface_cosines = vec![vec![0.0; n_cells]; n + 1];
    for k in 0..=n {
        let below = part.below(k);
        for i in 0..n_cells {
            let s = bathy.slope[i] + below * depth_slope[i];
            interface_slopes[k][i] = s;
            interface_cosines[k][i] = 1.0 / (1.0 + s * s).sqrt();
        }
    }
    let mut midpoint_slopes = vec![vec![0.0; n_cells]; n];
    let mut thickness_slopes = vec![vec![0.0; n_cells]; n];
    for a in 0..n {
        let l = part.fraction(a);
        let mid = part.below(a) + 0.5 * l;
        for i in 0..n_cells {
            midpoint_slopes[a][i] = bathy.slope[i] + mid * depth_slope[i];
            thickness_slopes[a][i] = l * depth_slope[i];
        }
    }

    Ok(InterfaceGeometry {
        interfaces,
        midpoints,
        thickness,
        gaps,
        interface_slopes,
        interface_cosines,
        midpoint_slopes,
        thickness_slopes,
        depth_slope,
    })
}
