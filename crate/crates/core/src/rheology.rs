//! Stress closures, interface tractions, bottom friction and the viscous
//! contribution to the layer momentum equations.
//!
//! Stresses are divided by the density throughout, like the pressure.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;
use crate::geometry::{Bathymetry, InterfaceGeometry};
use crate::kinematics::VerticalField;
use crate::mesh::Diff;
use crate::state::{LayerState, DRY_DEPTH};

/// Deviatoric stress components at interfaces (`N + 1` rows) and layers
/// (`N` rows), plus the tangential traction on every interface.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StressField {
    pub interface_xx: Vec<Vec<f64>>,
    pub interface_zz: Vec<Vec<f64>>,
    pub interface_zx: Vec<Vec<f64>>,
    pub interface_xz: Vec<Vec<f64>>,
    pub layer_xx: Vec<Vec<f64>>,
    pub layer_zz: Vec<Vec<f64>>,
    pub layer_zx: Vec<Vec<f64>>,
    pub layer_xz: Vec<Vec<f64>>,
    /// `sigma[interface][cell]`; bottom entry is the friction, surface is zero.
    pub traction: Vec<Vec<f64>>,
}

impl StressField {
    pub fn zeros(n_layers: usize, n_cells: usize) -> Self {
        let iface = vec![vec![0.0; n_cells]; n_layers + 1];
        let layer = vec![vec![0.0; n_cells]; n_layers];
        Self {
            interface_xx: iface.clone(),
            interface_zz: iface.clone(),
            interface_zx: iface.clone(),
            interface_xz: iface.clone(),
            layer_xx: layer.clone(),
            layer_zz: layer.clone(),
            layer_zx: layer.clone(),
            layer_xz: layer,
            traction: iface,
        }
    }

    fn newtonian(xx_i: Vec<Vec<f64>>, zx_i: Vec<Vec<f64>>, xx_l: Vec<Vec<f64>>, zx_l: Vec<Vec<f64>>) -> Self {
        let neg = |m: &[Vec<f64>]| m.iter().map(|r| r.iter().map(|v| -v).collect()).collect();
        let n_cells = xx_i.first().map_or(0, Vec::len);
        Self {
            interface_zz: neg(&xx_i),
            interface_xz: zx_i.clone(),
            layer_zz: neg(&xx_l),
            layer_xz: zx_l.clone(),
            traction: vec![vec![0.0; n_cells]; xx_i.len()],
            interface_xx: xx_i,
            interface_zx: zx_i,
            layer_xx: xx_l,
            layer_zx: zx_l,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placement {
    /// Stresses defined at interfaces, layer values are centred averages.
    Interface,
    /// Stresses defined in layers, interface values are centred averages.
    Layer,
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Placement::Interface => "interface",
            Placement::Layer => "layer",
        })
    }
}

impl FromStr for Placement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "interface" => Ok(Placement::Interface),
            "layer" => Ok(Placement::Layer),
            other => Err(Error::Input(format!("unknown stress placement '{other}'"))),
        }
    }
}

/// Everything a rheology closure may look at.
pub struct RheologyInput<'a> {
    pub state: &'a LayerState,
    pub vertical: &'a VerticalField,
    pub geom: &'a InterfaceGeometry,
    pub diff: &'a Diff,
}

/// User closure returning the stress components; the traction entries of
/// the returned field are ignored and recomputed from the general formula.
pub type StressHook = Arc<dyn Fn(&RheologyInput<'_>) -> StressField + Send + Sync>;

#[derive(Clone)]
pub enum Closure {
    Newtonian { viscosity: f64 },
    /// `viscosity_hint` feeds the explicit stability limit.
    Custom { hook: StressHook, viscosity_hint: f64 },
}

impl fmt::Debug for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Closure::Newtonian { viscosity } => write!(f, "Newtonian({viscosity})"),
            Closure::Custom { viscosity_hint, .. } => write!(f, "Custom(hint {viscosity_hint})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RheologyModel {
    pub closure: Closure,
    pub placement: Placement,
}

impl RheologyModel {
    pub fn newtonian(viscosity: f64, placement: Placement) -> crate::Result<Self> {
        if !(viscosity.is_finite() && viscosity > 0.0) {
            return Err(Error::Input(format!("Newtonian viscosity must be positive, got {viscosity}")));
        }
        Ok(Self {
            closure: Closure::Newtonian { viscosity },
            placement,
        })
    }

    pub fn viscosity(&self) -> f64 {
        match &self.closure {
            Closure::Newtonian { viscosity } => *viscosity,
            Closure::Custom { viscosity_hint, .. } => *viscosity_hint,
        }
    }
}

/// Navier wall law with `kappa = k_l + k_t H |u|`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FrictionLaw {
    pub laminar: f64,
    pub turbulent: f64,
}

impl FrictionLaw {
    pub fn coefficient(&self, u: f64, depth: f64) -> f64 {
        self.laminar + self.turbulent * depth * u.abs()
    }

    pub fn is_active(&self) -> bool {
        self.laminar != 0.0 || self.turbulent != 0.0
    }
}

/// Bottom traction `kappa u_1 / c_b^3` (the interface cosine equals `c_b`).
pub fn bottom_traction(u1: f64, depth: f64, law: &FrictionLaw, cos_b: f64) -> f64 {
    law.coefficient(u1, depth) * u1 / (cos_b * cos_b * cos_b)
}

/// `du_alpha/dx` and `dw_alpha/dx + dz_alpha/dx du_alpha/dx` per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct Deformation {
    pub stretch: Vec<Vec<f64>>,
    pub shear: Vec<Vec<f64>>,
}

pub fn deformation(vertical: &VerticalField, geom: &InterfaceGeometry, diff: &Diff) -> Deformation {
    let shear = vertical
        .w
        .iter()
        .enumerate()
        .map(|(a, w)| {
            diff.first(w)
                .iter()
                .enumerate()
                .map(|(i, dw)| dw + geom.midpoint_slopes[a][i] * vertical.du_dx[a][i])
                .collect()
        })
        .collect();
    Deformation {
        stretch: vertical.du_dx.clone(),
        shear,
    }
}

/// `u_{alpha+1} - u_alpha` across interface `k`; zero at bottom and surface
/// (the velocity is continued by the adjacent layer value).
fn jump(state: &LayerState, k: usize, i: usize) -> f64 {
    let n = state.n_layers();
    if k == 0 || k == n {
        0.0
    } else {
        state.velocity[k][i] - state.velocity[k - 1][i]
    }
}

/// Newtonian stresses at every interface (`Sigma_xx`, `Sigma_zx`).
///
/// At the bottom and the surface the missing neighbour layer has zero
/// thickness and the velocity jump vanishes.
pub fn newtonian_interface_stresses(
    state: &LayerState,
    def: &Deformation,
    geom: &InterfaceGeometry,
    viscosity: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = state.n_layers();
    let n_cells = state.n_cells();
    let mut xx = vec![vec![0.0; n_cells]; n + 1];
    let mut zx = vec![vec![0.0; n_cells]; n + 1];
    for k in 0..=n {
        for i in 0..n_cells {
            let gap = geom.gaps[k][i];
            if gap <= DRY_DEPTH {
                continue;
            }
            let (mut stretch, mut shear) = (0.0, 0.0);
            if k > 0 {
                let h = geom.thickness[k - 1][i];
                stretch += h * def.stretch[k - 1][i];
                shear += h * def.shear[k - 1][i];
            }
            if k < n {
                let h = geom.thickness[k][i];
                stretch += h * def.stretch[k][i];
                shear += h * def.shear[k][i];
            }
            let s = geom.interface_slopes[k][i];
            let du = jump(state, k, i);
            xx[k][i] = 2.0 * viscosity * (0.5 * stretch - s * du) / gap;
            zx[k][i] = viscosity * (0.5 * shear + du * (1.0 - s * s)) / gap;
        }
    }
    (xx, zx)
}

/// Centred layer values from interface values.
pub fn layer_stresses_centered(interface: &[Vec<f64>]) -> Vec<Vec<f64>> {
    interface
        .windows(2)
        .map(|w| w[0].iter().zip(&w[1]).map(|(lo, hi)| 0.5 * (lo + hi)).collect())
        .collect()
}

/// Centred interface values from layer values; bottom and surface take the
/// adjacent layer value.
pub fn interface_stresses_centered(layer: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = layer.len();
    let mut out = Vec::with_capacity(n + 1);
    out.push(layer[0].clone());
    for w in layer.windows(2) {
        out.push(w[0].iter().zip(&w[1]).map(|(lo, hi)| 0.5 * (lo + hi)).collect());
    }
    out.push(layer[n - 1].clone());
    out
}

/// Layer-centred Newtonian closure: returns layer `(Sigma_xx, Sigma_zx)`.
pub fn newtonian_layer_stresses(
    state: &LayerState,
    def: &Deformation,
    geom: &InterfaceGeometry,
    viscosity: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = state.n_layers();
    let n_cells = state.n_cells();
    let mut xx = vec![vec![0.0; n_cells]; n];
    let mut zx = vec![vec![0.0; n_cells]; n];
    for a in 0..n {
        for i in 0..n_cells {
            let h = geom.thickness[a][i];
            if h <= DRY_DEPTH {
                continue;
            }
            let (s_up, s_lo) = (geom.interface_slopes[a + 1][i], geom.interface_slopes[a][i]);
            let (du_up, du_lo) = (jump(state, a + 1, i), jump(state, a, i));
            let hxx = h * def.stretch[a][i] - (s_up * 0.5 * du_up + s_lo * 0.5 * du_lo);
            let hzx = h * def.shear[a][i]
                + 0.5 * du_up * (1.0 - s_up * s_up)
                + 0.5 * du_lo * (1.0 - s_lo * s_lo);
            xx[a][i] = 2.0 * viscosity * hxx / h;
            zx[a][i] = viscosity * hzx / h;
        }
    }
    (xx, zx)
}

/// `sigma = Sigma_xz - s (Sigma_xx + s Sigma_zx - Sigma_zz)` for slope `s`.
pub fn general_traction(xx: f64, zz: f64, zx: f64, xz: f64, slope: f64) -> f64 {
    xz - slope * (xx + slope * zx - zz)
}

/// Newtonian reduction of [`general_traction`].
pub fn newtonian_traction(xx: f64, zx: f64, slope: f64) -> f64 {
    -2.0 * xx * slope + zx * (1.0 - slope * slope)
}

/// Fills `stress.traction`: interior interfaces from the stresses, bottom
/// from the friction law, zero at the free surface.
pub fn tangential_traction(
    stress: &mut StressField,
    state: &LayerState,
    geom: &InterfaceGeometry,
    bathy: &Bathymetry,
    friction: &FrictionLaw,
) {
    let n = state.n_layers();
    let n_cells = state.n_cells();
    let mut sigma = vec![vec![0.0; n_cells]; n + 1];
    for i in 0..n_cells {
        sigma[0][i] = bottom_traction(state.velocity[0][i], state.depth[i], friction, bathy.cosine[i]);
        for k in 1..n {
            sigma[k][i] = general_traction(
                stress.interface_xx[k][i],
                stress.interface_zz[k][i],
                stress.interface_zx[k][i],
                stress.interface_xz[k][i],
                geom.interface_slopes[k][i],
            );
        }
    }
    stress.traction = sigma;
}

/// Full stress field for the configured rheology.
pub fn compute_stresses(
    model: &RheologyModel,
    input: &RheologyInput<'_>,
    bathy: &Bathymetry,
    friction: &FrictionLaw,
) -> StressField {
    let mut field = match &model.closure {
        Closure::Newtonian { viscosity } => {
            let def = deformation(input.vertical, input.geom, input.diff);
            match model.placement {
                Placement::Interface => {
                    let (xx, zx) = newtonian_interface_stresses(input.state, &def, input.geom, *viscosity);
                    let (lxx, lzx) = (layer_stresses_centered(&xx), layer_stresses_centered(&zx));
                    StressField::newtonian(xx, zx, lxx, lzx)
                }
                Placement::Layer => {
                    let (lxx, lzx) = newtonian_layer_stresses(input.state, &def, input.geom, *viscosity);
                    let (xx, zx) = (interface_stresses_centered(&lxx), interface_stresses_centered(&lzx));
                    StressField::newtonian(xx, zx, lxx, lzx)
                }
            }
        }
        Closure::Custom { hook, .. } => hook(input),
    };
    tangential_traction(&mut field, input.state, input.geom, bathy, friction);
    field
}

/// Viscous momentum contribution `V_alpha` of every layer.
pub fn viscous_rhs(stress: &StressField, geom: &InterfaceGeometry, diff: &Diff) -> Vec<Vec<f64>> {
    let n = geom.n_layers();
    let n_cells = geom.n_cells();

    // suffix[a] = sum_{j >= a} h_j Sigma_zx,j ; suffix[n] = 0
    let mut suffix = vec![vec![0.0; n_cells]; n + 1];
    for a in (0..n).rev() {
        for i in 0..n_cells {
            suffix[a][i] = suffix[a + 1][i] + geom.thickness[a][i] * stress.layer_zx[a][i];
        }
    }
    let curvature: Vec<Vec<f64>> = suffix.iter().map(|s| diff.second(s)).collect();

    (0..n)
        .map(|a| {
            let moment: Vec<f64> = (0..n_cells)
                .map(|i| geom.thickness[a][i] * geom.midpoints[a][i] * stress.layer_zx[a][i])
                .collect();
            let d_moment = diff.first(&moment);
            let inner: Vec<f64> = (0..n_cells)
                .map(|i| {
                    geom.thickness[a][i] * (stress.layer_xx[a][i] - stress.layer_zz[a][i]) + d_moment[i]
                })
                .collect();
            let d_inner = diff.first(&inner);
            (0..n_cells)
                .map(|i| {
                    d_inner[i] + geom.interfaces[a + 1][i] * curvature[a + 1][i]
                        - geom.interfaces[a][i] * curvature[a][i]
                        + stress.traction[a + 1][i]
                        - stress.traction[a][i]
                })
                .collect()
        })
        .collect()
}
