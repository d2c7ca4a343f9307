//! Assembly of the full right-hand side (Euler part plus rheology and
//! friction) for one scenario.

use crate::error::{Error, Result};
use crate::euler::{euler_rhs, EulerRhs};
use crate::geometry::{build_geometry, Bathymetry, InterfaceGeometry, LayerPartition};
use crate::kinematics::{vertical_field, VerticalField};
use crate::mesh::Mesh;
use crate::rheology::{compute_stresses, tangential_traction, viscous_rhs, FrictionLaw, RheologyInput, RheologyModel, StressField};
use crate::state::LayerState;

#[derive(Debug, Clone)]
pub struct Physics {
    pub gravity: f64,
    /// `None` for the inviscid system.
    pub rheology: Option<RheologyModel>,
    pub friction: FrictionLaw,
}

impl Physics {
    pub fn inviscid(gravity: f64) -> Self {
        Self {
            gravity,
            rheology: None,
            friction: FrictionLaw::default(),
        }
    }

    pub fn viscosity(&self) -> f64 {
        self.rheology.as_ref().map_or(0.0, RheologyModel::viscosity)
    }
}

/// Time derivative of the conservative variables `(H, q_alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rhs {
    pub depth: Vec<f64>,
    pub discharge: Vec<Vec<f64>>,
}

impl Rhs {
    pub fn zeros(n_layers: usize, n_cells: usize) -> Self {
        Self {
            depth: vec![0.0; n_cells],
            discharge: vec![vec![0.0; n_cells]; n_layers],
        }
    }
}

/// All intermediate fields of one right-hand-side evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub rhs: Rhs,
    pub euler: EulerRhs,
    pub geometry: InterfaceGeometry,
    pub vertical: VerticalField,
    pub stress: StressField,
    /// Viscous and friction contribution `V_alpha`.
    pub viscous: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Solver {
    pub mesh: Mesh,
    pub partition: LayerPartition,
    pub bathymetry: Bathymetry,
    pub physics: Physics,
}

impl Solver {
    pub fn new(mesh: Mesh, partition: LayerPartition, bathymetry: Bathymetry, physics: Physics) -> Result<Self> {
        if bathymetry.elevation.len() != mesh.n_cells {
            return Err(Error::Input("bathymetry does not match the mesh".into()));
        }
        if !(physics.gravity.is_finite() && physics.gravity > 0.0) {
            return Err(Error::Input(format!("gravity must be positive, got {}", physics.gravity)));
        }
        Ok(Self {
            mesh,
            partition,
            bathymetry,
            physics,
        })
    }

    pub fn n_layers(&self) -> usize {
        self.partition.n_layers()
    }

    pub fn geometry(&self, state: &LayerState) -> Result<InterfaceGeometry> {
        build_geometry(&self.mesh, &state.depth, &self.bathymetry, &self.partition)
    }

    pub fn evaluate(&self, state: &LayerState) -> Result<Evaluation> {
        let euler = euler_rhs(&self.mesh, state, &self.bathymetry, &self.partition, self.physics.gravity)?;
        let geometry = self.geometry(state)?;
        let diff = self.mesh.diff();
        let vertical = vertical_field(state, &geometry, &diff);
        let n = self.n_layers();
        let n_cells = self.mesh.n_cells;

        let needs_viscous = self.physics.rheology.is_some() || self.physics.friction.is_active();
        let (stress, viscous) = if needs_viscous {
            let stress = match &self.physics.rheology {
                Some(model) => {
                    let input = RheologyInput {
                        state,
                        vertical: &vertical,
                        geom: &geometry,
                        diff: &diff,
                    };
                    compute_stresses(model, &input, &self.bathymetry, &self.physics.friction)
                }
                None => {
                    let mut s = StressField::zeros(n, n_cells);
                    tangential_traction(&mut s, state, &geometry, &self.bathymetry, &self.physics.friction);
                    s
                }
            };
            let viscous = viscous_rhs(&stress, &geometry, &diff);
            (stress, viscous)
        } else {
            (StressField::zeros(n, n_cells), vec![vec![0.0; n_cells]; n])
        };

        let mut rhs = Rhs {
            depth: euler.depth.clone(),
            discharge: euler.discharge.clone(),
        };
        for (dq, v) in rhs.discharge.iter_mut().zip(&viscous) {
            for (a, b) in dq.iter_mut().zip(v) {
                *a += b;
            }
        }
        Ok(Evaluation {
            rhs,
            euler,
            geometry,
            vertical,
            stress,
            viscous,
        })
    }

    pub fn rhs(&self, state: &LayerState) -> Result<Rhs> {
        Ok(self.evaluate(state)?.rhs)
    }
}
