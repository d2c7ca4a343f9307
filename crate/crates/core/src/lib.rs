//! Layer-averaged hydrostatic free-surface flow in one horizontal dimension.
//!
//! The water column is split into layers holding fixed fractions of the
//! local depth. Each layer carries its own horizontal velocity; layers
//! exchange mass through their interfaces, and a Newtonian closure with a
//! Navier bottom friction supplies the viscous terms. Vertical velocities
//! and energies are diagnostics.

pub mod driver;
pub mod energy;
pub mod error;
pub mod euler;
pub mod geometry;
pub mod kinematics;
pub mod mesh;
pub mod output;
pub mod rheology;
pub mod scenario;
pub mod solver;
pub mod state;
pub mod sv_reference;
pub mod time_loop;
pub mod verification;

pub use error::{Error, Result};
pub use geometry::{Bathymetry, LayerPartition};
pub use mesh::{BoundaryKind, Mesh};
pub use scenario::{parse_config, Scenario};
pub use solver::{Physics, Solver};
pub use state::LayerState;
pub use time_loop::{Integrator, TimeControls};
