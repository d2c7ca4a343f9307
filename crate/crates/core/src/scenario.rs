//! Scenario files: flat `section.key = value` lines, `#` comments and
//! comma-separated lists.
//!
//! ```text
//! mesh.x_min = 0
//! mesh.x_max = 10
//! mesh.n_cells = 200
//! initial.kind = dam_break
//! initial.eta_left = 1
//! initial.eta_right = 0.5
//! initial.x0 = 5
//! physics.g = 9.81
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{Bathymetry, LayerPartition};
use crate::mesh::{BoundaryKind, Mesh};
use crate::rheology::{FrictionLaw, Placement, RheologyModel};
use crate::solver::{Physics, Solver};
use crate::state::LayerState;
use crate::sv_reference::{SvModel, SvState};
use crate::time_loop::TimeControls;

#[derive(Debug, Clone, PartialEq)]
pub enum BathymetrySpec {
    Flat { level: f64 },
    /// `z_b = slope (x - x_min)`
    Slope { slope: f64 },
    /// `z_b = amplitude exp(-((x - center) / width)^2)`
    Bump { amplitude: f64, center: f64, width: f64 },
    Table(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    /// Flat surface `eta`, with a uniform velocity `u` in all layers.
    LakeAtRest { eta: f64, u: f64 },
    DamBreak { eta_left: f64, eta_right: f64, x0: f64, u: f64 },
    /// Uniform depth with one velocity per layer.
    Shear { depth: f64, velocities: Vec<f64> },
    /// Per-cell depth and velocity (shared by all layers).
    Table { depth: Vec<f64>, u: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Multilayer,
    /// Single-layer reference solver.
    Sv1,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub boundary: BoundaryKind,
    pub n_layers: usize,
    /// `None` for equal layers.
    pub fractions: Option<Vec<f64>>,
    pub bathymetry: BathymetrySpec,
    pub initial: InitialSpec,
    pub gravity: f64,
    /// Zero for the inviscid system.
    pub viscosity: f64,
    pub friction: FrictionLaw,
    pub placement: Placement,
    pub controls: TimeControls,
    pub snapshot_every: Option<f64>,
    pub directory: String,
    pub solver: SolverKind,
}

const KEYS: &[&str] = &[
    "mesh.x_min",
    "mesh.x_max",
    "mesh.n_cells",
    "boundary.kind",
    "layers.n",
    "layers.fractions",
    "bathymetry.kind",
    "bathymetry.level",
    "bathymetry.slope",
    "bathymetry.amplitude",
    "bathymetry.center",
    "bathymetry.width",
    "bathymetry.values",
    "initial.kind",
    "initial.eta",
    "initial.eta_left",
    "initial.eta_right",
    "initial.x0",
    "initial.u",
    "initial.depth",
    "initial.velocities",
    "initial.depth_table",
    "initial.u_table",
    "physics.g",
    "physics.mu",
    "physics.k_l",
    "physics.k_t",
    "physics.placement",
    "controls.cfl",
    "controls.t_end",
    "controls.integrator",
    "controls.viscous_safety",
    "output.snapshot_every",
    "output.directory",
    "solver.kind",
];

struct Entries {
    values: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.values.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn required(&self, key: &str) -> Result<(usize, &str)> {
        self.raw(key)
            .ok_or_else(|| Error::ConfigMissing(format!("missing required key '{key}'")))
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key).map(|(line, v)| parse_number(key, line, v)).transpose()
    }

    fn number_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.number(key)?.unwrap_or(default))
    }

    fn required_number(&self, key: &str) -> Result<f64> {
        let (line, v) = self.required(key)?;
        parse_number(key, line, v)
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|(line, v)| v.split(',').map(|item| parse_number(key, line, item.trim())).collect())
            .transpose()
    }

    fn required_list(&self, key: &str) -> Result<Vec<f64>> {
        self.required(key)?;
        Ok(self.list(key)?.unwrap_or_default())
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.raw(key)
            .map(|(line, v)| {
                v.parse::<usize>().map_err(|_| Error::Config {
                    line,
                    message: format!("{key}: expected a non-negative integer, got '{v}'"),
                })
            })
            .transpose()
    }

    fn parsed<T: FromStr<Err = Error>>(&self, key: &str) -> Result<Option<T>> {
        self.raw(key)
            .map(|(line, v)| {
                v.parse::<T>().map_err(|e| Error::Config {
                    line,
                    message: format!("{key}: {e}"),
                })
            })
            .transpose()
    }

    fn line(&self, key: &str) -> usize {
        self.raw(key).map_or(0, |(l, _)| l)
    }
}

fn parse_number(key: &str, line: usize, v: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::Config {
            line,
            message: format!("{key}: malformed number '{v}'"),
        }),
    }
}

fn invalid(entries: &Entries, key: &str, message: String) -> Error {
    Error::Config {
        line: entries.line(key),
        message: format!("{key}: {message}"),
    }
}

fn tokenize(text: &str) -> Result<Entries> {
    let mut values = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected 'key = value', got '{content}'"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line,
                message: format!("unknown key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(Error::Config {
                line,
                message: format!("{key}: empty value"),
            });
        }
        if let Some((first, _)) = values.insert(key.to_string(), (line, value.to_string())) {
            return Err(Error::Config {
                line,
                message: format!("{key}: duplicate key (first set on line {first})"),
            });
        }
    }
    Ok(Entries { values })
}

fn bathymetry_spec(e: &Entries) -> Result<BathymetrySpec> {
    let kind = e.raw("bathymetry.kind").map_or("flat", |(_, v)| v);
    Ok(match kind {
        "flat" => BathymetrySpec::Flat {
            level: e.number_or("bathymetry.level", 0.0)?,
        },
        "slope" => BathymetrySpec::Slope {
            slope: e.required_number("bathymetry.slope")?,
        },
        "bump" => BathymetrySpec::Bump {
            amplitude: e.required_number("bathymetry.amplitude")?,
            center: e.required_number("bathymetry.center")?,
            width: e.required_number("bathymetry.width")?,
        },
        "table" => BathymetrySpec::Table(e.required_list("bathymetry.values")?),
        other => return Err(invalid(e, "bathymetry.kind", format!("unknown kind '{other}'"))),
    })
}

fn initial_spec(e: &Entries) -> Result<InitialSpec> {
    let (line, kind) = e.required("initial.kind")?;
    Ok(match kind {
        "lake_at_rest" => InitialSpec::LakeAtRest {
            eta: e.required_number("initial.eta")?,
            u: e.number_or("initial.u", 0.0)?,
        },
        "dam_break" => InitialSpec::DamBreak {
            eta_left: e.required_number("initial.eta_left")?,
            eta_right: e.required_number("initial.eta_right")?,
            x0: e.required_number("initial.x0")?,
            u: e.number_or("initial.u", 0.0)?,
        },
        "shear" => InitialSpec::Shear {
            depth: e.required_number("initial.depth")?,
            velocities: e.required_list("initial.velocities")?,
        },
        "table" => InitialSpec::Table {
            depth: e.required_list("initial.depth_table")?,
            u: e.required_list("initial.u_table")?,
        },
        other => {
            return Err(Error::Config {
                line,
                message: format!("initial.kind: unknown kind '{other}'"),
            })
        }
    })
}

/// Parses and validates a scenario.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let e = tokenize(text)?;
    let n_cells = e
        .count("mesh.n_cells")?
        .ok_or_else(|| Error::ConfigMissing("missing required key 'mesh.n_cells'".into()))?;
    let fractions = e.list("layers.fractions")?;
    let n_layers = match (e.count("layers.n")?, &fractions) {
        (Some(n), Some(f)) if n != f.len() => {
            return Err(invalid(&e, "layers.n", format!("{n} layers but {} fractions", f.len())))
        }
        (Some(n), _) => n,
        (None, Some(f)) => f.len(),
        (None, None) => 1,
    };
    let defaults = TimeControls::default();
    let scenario = Scenario {
        x_min: e.required_number("mesh.x_min")?,
        x_max: e.required_number("mesh.x_max")?,
        n_cells,
        boundary: e.parsed("boundary.kind")?.unwrap_or(BoundaryKind::Transmissive),
        n_layers,
        fractions,
        bathymetry: bathymetry_spec(&e)?,
        initial: initial_spec(&e)?,
        gravity: e.required_number("physics.g")?,
        viscosity: e.number_or("physics.mu", 0.0)?,
        friction: FrictionLaw {
            laminar: e.number_or("physics.k_l", 0.0)?,
            turbulent: e.number_or("physics.k_t", 0.0)?,
        },
        placement: e.parsed("physics.placement")?.unwrap_or(Placement::Interface),
        controls: TimeControls {
            cfl: e.number_or("controls.cfl", defaults.cfl)?,
            t_end: e.number_or("controls.t_end", defaults.t_end)?,
            integrator: e.parsed("controls.integrator")?.unwrap_or(defaults.integrator),
            viscous_safety: e.number_or("controls.viscous_safety", defaults.viscous_safety)?,
        },
        snapshot_every: e.number("output.snapshot_every")?,
        directory: e.raw("output.directory").map_or("out", |(_, v)| v).to_string(),
        solver: match e.raw("solver.kind").map(|(_, v)| v) {
            None | Some("multilayer") => SolverKind::Multilayer,
            Some("sv1") => SolverKind::Sv1,
            Some(other) => return Err(invalid(&e, "solver.kind", format!("unknown solver '{other}'"))),
        },
    };
    validate(&scenario, &e)?;
    Ok(scenario)
}

fn validate(s: &Scenario, e: &Entries) -> Result<()> {
    let bad = |key: &str, msg: String| Err(invalid(e, key, msg));
    if s.n_cells < 3 {
        return bad("mesh.n_cells", format!("need at least 3 cells, got {}", s.n_cells));
    }
    if s.x_max <= s.x_min {
        return bad("mesh.x_max", format!("must exceed mesh.x_min ({} <= {})", s.x_max, s.x_min));
    }
    if s.n_layers == 0 {
        return bad("layers.n", "need at least one layer".into());
    }
    if let Err(Error::Partition(msg)) = s.partition() {
        let key = if s.fractions.is_some() { "layers.fractions" } else { "layers.n" };
        return Err(Error::Config {
            line: e.line(key),
            message: msg,
        });
    }
    if !(s.gravity > 0.0) {
        return bad("physics.g", format!("must be positive, got {}", s.gravity));
    }
    if s.viscosity < 0.0 {
        return bad("physics.mu", format!("must be non-negative, got {}", s.viscosity));
    }
    if s.friction.laminar < 0.0 {
        return bad("physics.k_l", format!("must be non-negative, got {}", s.friction.laminar));
    }
    if s.friction.turbulent < 0.0 {
        return bad("physics.k_t", format!("must be non-negative, got {}", s.friction.turbulent));
    }
    let c = &s.controls;
    if !(c.cfl > 0.0 && c.cfl <= 1.0) {
        return bad("controls.cfl", format!("must lie in (0, 1], got {}", c.cfl));
    }
    if !(c.t_end > 0.0) {
        return bad("controls.t_end", format!("must be positive, got {}", c.t_end));
    }
    if !(c.viscous_safety > 0.0 && c.viscous_safety <= 1.0) {
        return bad("controls.viscous_safety", format!("must lie in (0, 1], got {}", c.viscous_safety));
    }
    if let Some(every) = s.snapshot_every {
        if !(every > 0.0) {
            return bad("output.snapshot_every", format!("must be positive, got {every}"));
        }
    }
    if let BathymetrySpec::Bump { width, .. } = s.bathymetry {
        if !(width > 0.0) {
            return bad("bathymetry.width", format!("must be positive, got {width}"));
        }
    }
    if let BathymetrySpec::Table(v) = &s.bathymetry {
        if v.len() != s.n_cells {
            return bad("bathymetry.values", format!("{} values for {} cells", v.len(), s.n_cells));
        }
    }
    match &s.initial {
        InitialSpec::Shear { depth, velocities } => {
            if velocities.len() != s.n_layers {
                return bad(
                    "initial.velocities",
                    format!("{} velocities for {} layers", velocities.len(), s.n_layers),
                );
            }
            if !(*depth >= 0.0) {
                return bad("initial.depth", format!("must be non-negative, got {depth}"));
            }
        }
        InitialSpec::Table { depth, u } => {
            if depth.len() != s.n_cells {
                return bad("initial.depth_table", format!("{} values for {} cells", depth.len(), s.n_cells));
            }
            if u.len() != s.n_cells {
                return bad("initial.u_table", format!("{} values for {} cells", u.len(), s.n_cells));
            }
            if let Some(h) = depth.iter().find(|h| **h < 0.0) {
                return bad("initial.depth_table", format!("negative depth {h}"));
            }
        }
        _ => {}
    }
    if s.solver == SolverKind::Sv1 && s.n_layers != 1 {
        return bad("solver.kind", format!("sv1 needs exactly one layer, got {}", s.n_layers));
    }
    Ok(())
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ")
}

impl Scenario {
    /// Canonical text form; `parse_config(&s.print())` returns `s`.
    pub fn print(&self) -> String {
        let mut o = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        kv("mesh.x_min", self.x_min.to_string());
        kv("mesh.x_max", self.x_max.to_string());
        kv("mesh.n_cells", self.n_cells.to_string());
        kv("boundary.kind", self.boundary.to_string());
        kv("layers.n", self.n_layers.to_string());
        if let Some(f) = &self.fractions {
            kv("layers.fractions", join(f));
        }
        match &self.bathymetry {
            BathymetrySpec::Flat { level } => {
                kv("bathymetry.kind", "flat".into());
                kv("bathymetry.level", level.to_string());
            }
            BathymetrySpec::Slope { slope } => {
                kv("bathymetry.kind", "slope".into());
                kv("bathymetry.slope", slope.to_string());
            }
            BathymetrySpec::Bump { amplitude, center, width } => {
                kv("bathymetry.kind", "bump".into());
                kv("bathymetry.amplitude", amplitude.to_string());
                kv("bathymetry.center", center.to_string());
                kv("bathymetry.width", width.to_string());
            }
            BathymetrySpec::Table(v) => {
                kv("bathymetry.kind", "table".into());
                kv("bathymetry.values", join(v));
            }
        }
        match &self.initial {
            InitialSpec::LakeAtRest { eta, u } => {
                kv("initial.kind", "lake_at_rest".into());
                kv("initial.eta", eta.to_string());
                kv("initial.u", u.to_string());
            }
            InitialSpec::DamBreak { eta_left, eta_right, x0, u } => {
                kv("initial.kind", "dam_break".into());
                kv("initial.eta_left", eta_left.to_string());
                kv("initial.eta_right", eta_right.to_string());
                kv("initial.x0", x0.to_string());
                kv("initial.u", u.to_string());
            }
            InitialSpec::Shear { depth, velocities } => {
                kv("initial.kind", "shear".into());
                kv("initial.depth", depth.to_string());
                kv("initial.velocities", join(velocities));
            }
            InitialSpec::Table { depth, u } => {
                kv("initial.kind", "table".into());
                kv("initial.depth_table", join(depth));
                kv("initial.u_table", join(u));
            }
        }
        kv("physics.g", self.gravity.to_string());
        kv("physics.mu", self.viscosity.to_string());
        kv("physics.k_l", self.friction.laminar.to_string());
        kv("physics.k_t", self.friction.turbulent.to_string());
        kv("physics.placement", self.placement.to_string());
        kv("controls.cfl", self.controls.cfl.to_string());
        kv("controls.t_end", self.controls.t_end.to_string());
        kv("controls.integrator", self.controls.integrator.to_string());
        kv("controls.viscous_safety", self.controls.viscous_safety.to_string());
        if let Some(every) = self.snapshot_every {
            kv("output.snapshot_every", every.to_string());
        }
        kv("output.directory", self.directory.clone());
        kv(
            "solver.kind",
            match self.solver {
                SolverKind::Multilayer => "multilayer",
                SolverKind::Sv1 => "sv1",
            }
            .into(),
        );
        o
    }

    pub fn partition(&self) -> Result<LayerPartition> {
        match &self.fractions {
            Some(f) => LayerPartition::new(f.clone()),
            None => LayerPartition::uniform(self.n_layers),
        }
    }

    pub fn mesh(&self) -> Result<Mesh> {
        Mesh::new(self.x_min, self.x_max, self.n_cells, self.boundary)
    }

    pub fn bottom(&self, mesh: &Mesh) -> Vec<f64> {
        let x = mesh.centers();
        match &self.bathymetry {
            BathymetrySpec::Flat { level } => vec![*level; x.len()],
            BathymetrySpec::Slope { slope } => x.iter().map(|x| slope * (x - self.x_min)).collect(),
            BathymetrySpec::Bump { amplitude, center, width } => x
                .iter()
                .map(|x| amplitude * (-((x - center) / width).powi(2)).exp())
                .collect(),
            BathymetrySpec::Table(v) => v.clone(),
        }
    }

    pub fn physics(&self) -> Result<Physics> {
        let rheology = if self.viscosity > 0.0 {
            Some(RheologyModel::newtonian(self.viscosity, self.placement)?)
        } else {
            None
        };
        Ok(Physics {
            gravity: self.gravity,
            rheology,
            friction: self.friction,
        })
    }

    pub fn solver(&self) -> Result<Solver> {
        let mesh = self.mesh()?;
        let bathy = Bathymetry::new(&mesh, self.bottom(&mesh))?;
        Solver::new(mesh, self.partition()?, bathy, self.physics()?)
    }

    /// Initial depth and per-layer velocities.
    pub fn initial_state(&self) -> Result<LayerState> {
        let mesh = self.mesh()?;
        let zb = self.bottom(&mesh);
        let x = mesh.centers();
        let n = self.n_layers;
        match &self.initial {
            InitialSpec::LakeAtRest { eta, u } => {
                let depth = zb.iter().map(|b| (eta - b).max(0.0)).collect();
                LayerState::uniform_velocity(depth, vec![*u; x.len()], n)
            }
            InitialSpec::DamBreak { eta_left, eta_right, x0, u } => {
                let depth = x
                    .iter()
                    .zip(&zb)
                    .map(|(x, b)| (if *x < *x0 { eta_left } else { eta_right } - b).max(0.0))
                    .collect();
                LayerState::uniform_velocity(depth, vec![*u; x.len()], n)
            }
            InitialSpec::Shear { depth, velocities } => {
                LayerState::new(vec![*depth; x.len()], velocities.iter().map(|v| vec![*v; x.len()]).collect())
            }
            InitialSpec::Table { depth, u } => LayerState::uniform_velocity(depth.clone(), u.clone(), n),
        }
    }

    pub fn sv_model(&self) -> Result<SvModel> {
        let mesh = self.mesh()?;
        let bottom = self.bottom(&mesh);
        Ok(SvModel {
            mesh,
            bottom,
            g: self.gravity,
            mu: self.viscosity,
            k_laminar: self.friction.laminar,
            k_turbulent: self.friction.turbulent,
        })
    }

    pub fn sv_initial_state(&self) -> Result<SvState> {
        let s = self.initial_state()?;
        SvState::new(s.depth, s.velocity[0].clone())
    }
}
