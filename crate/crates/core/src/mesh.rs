//! Uniform 1D mesh, boundary kinds and the centred difference operators
//! shared by every diagnostic and viscous term.

use std::fmt;
use std::str::FromStr;

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    Periodic,
    /// Reflective wall: mirrored depth and bathymetry, negated velocity.
    Wall,
    /// Zero-gradient outflow.
    Transmissive,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Periodic => "periodic",
            BoundaryKind::Wall => "wall",
            BoundaryKind::Transmissive => "transmissive",
        })
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "periodic" => Ok(BoundaryKind::Periodic),
            "wall" => Ok(BoundaryKind::Wall),
            "transmissive" => Ok(BoundaryKind::Transmissive),
            other => Err(Error::Input(format!("unknown boundary kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mesh {
    pub x_min: f64,
    pub x_max: f64,
    pub n_cells: usize,
    pub boundary: BoundaryKind,
}

impl Mesh {
    pub fn new(x_min: f64, x_max: f64, n_cells: usize, boundary: BoundaryKind) -> crate::Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Input(format!("mesh bounds [{x_min}, {x_max}] are not an interval")));
        }
        if n_cells < 3 {
            return Err(Error::Input(format!("mesh needs at least 3 cells, got {n_cells}")));
        }
        Ok(Self { x_min, x_max, n_cells, boundary })
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_cells as f64
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn center(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.center(i)).collect()
    }

    pub fn is_periodic(&self) -> bool {
        self.boundary == BoundaryKind::Periodic
    }

    pub fn diff(&self) -> Diff {
        Diff {
            inv_dx: 1.0 / self.dx(),
            periodic: self.is_periodic(),
        }
    }
}

/// Centred finite differences on a uniform mesh. Periodic meshes wrap;
/// otherwise the end cells use one-sided (shifted) stencils.
#[derive(Debug, Clone, Copy)]
pub struct Diff {
    inv_dx: f64,
    periodic: bool,
}

impl Diff {
    pub fn new(dx: f64, periodic: bool) -> Self {
        Self { inv_dx: 1.0 / dx, periodic }
    }

    pub fn first(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mut out = vec![0.0; n];
        if n < 2 {
            return out;
        }
        let half = 0.5 * self.inv_dx;
        for i in 1..n - 1 {
            out[i] = (f[i + 1] - f[i - 1]) * half;
        }
        if self.periodic {
            out[0] = (f[1] - f[n - 1]) * half;
            out[n - 1] = (f[0] - f[n - 2]) * half;
        } else {
            out[0] = (f[1] - f[0]) * self.inv_dx;
            out[n - 1] = (f[n - 1] - f[n - 2]) * self.inv_dx;
        }
        out
    }

    pub fn second(&self, f: &[f64]) -> Vec<f64> {
        let n = f.len();
        let mut out = vec![0.0; n];
        if n < 3 {
            return out;
        }
        let s = self.inv_dx * self.inv_dx;
        for i in 1..n - 1 {
            out[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) * s;
        }
        if self.periodic {
            out[0] = (f[1] - 2.0 * f[0] + f[n - 1]) * s;
            out[n - 1] = (f[0] - 2.0 * f[n - 1] + f[n - 2]) * s;
        } else {
            out[0] = out[1];
            out[n - 1] = out[n - 2];
        }
        out
    }
}
