//! Stand-alone single-layer viscous Saint-Venant solver.
//!
//! Written directly in terms of `(H, H u)` with its own HLL flux, hydrostatic
//! reconstruction, stresses and stepping, so that it can serve as an oracle
//! for the one-layer path of the multilayer solver. Only the mesh and the
//! centred difference operators are shared.

use crate::error::{Error, Result};
use crate::mesh::{BoundaryKind, Diff, Mesh};

const DRY: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SvState {
    pub depth: Vec<f64>,
    pub velocity: Vec<f64>,
}

impl SvState {
    pub fn new(depth: Vec<f64>, mut velocity: Vec<f64>) -> Result<Self> {
        if depth.len() != velocity.len() {
            return Err(Error::Input("depth and velocity lengths differ".into()));
        }
        for (h, u) in depth.iter().zip(velocity.iter_mut()) {
            if !h.is_finite() || *h < 0.0 || !u.is_finite() {
                return Err(Error::Input(format!("invalid single-layer state H={h}, u={u}")));
            }
            if *h <= DRY {
                *u = 0.0;
            }
        }
        Ok(Self { depth, velocity })
    }

    pub fn discharge(&self) -> Vec<f64> {
        self.depth.iter().zip(&self.velocity).map(|(h, u)| h * u).collect()
    }
}

#[derive(Debug, Clone)]
pub struct SvModel {
    pub mesh: Mesh,
    pub bottom: Vec<f64>,
    pub g: f64,
    /// Zero for the inviscid system.
    pub mu: f64,
    pub k_laminar: f64,
    pub k_turbulent: f64,
}

/// Time derivatives of `H` and `H u`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvRhs {
    pub depth: Vec<f64>,
    pub discharge: Vec<f64>,
}

fn hll(hl: f64, ul: f64, hr: f64, ur: f64, g: f64) -> (f64, f64) {
    if hl <= 0.0 && hr <= 0.0 {
        return (0.0, 0.0);
    }
    let (cl, cr) = ((g * hl).sqrt(), (g * hr).sqrt());
    let sl = (ul - cl).min(ur - cr);
    let sr = (ul + cl).max(ur + cr);
    let fl = (hl * ul, hl * ul * ul + 0.5 * g * hl * hl);
    let fr = (hr * ur, hr * ur * ur + 0.5 * g * hr * hr);
    if sl >= 0.0 {
        return fl;
    }
    if sr <= 0.0 {
        return fr;
    }
    let inv = 1.0 / (sr - sl);
    (
        (sr * fl.0 - sl * fr.0 + sr * sl * (hr - hl)) * inv,
        (sr * fl.1 - sl * fr.1 + sr * sl * (hr * ur - hl * ul)) * inv,
    )
}

impl SvModel {
    fn diff(&self) -> Diff {
        Diff::new(self.mesh.dx(), self.mesh.boundary == BoundaryKind::Periodic)
    }

    fn kappa(&self, h: f64, u: f64) -> f64 {
        self.k_laminar + self.k_turbulent * h * u.abs()
    }

    fn bottom_cosine(&self) -> Vec<f64> {
        self.diff().first(&self.bottom).iter().map(|s| 1.0 / (1.0 + s * s).sqrt()).collect()
    }

    /// `w = -1/2 d(H u)/dx + u d((H + 2 z_b)/2)/dx`, with the derivative of
    /// the product expanded.
    pub fn mean_vertical_velocity(&self, s: &SvState) -> Vec<f64> {
        let d = self.diff();
        let (dh, du, dzb) = (d.first(&s.depth), d.first(&s.velocity), d.first(&self.bottom));
        (0..s.depth.len())
            .map(|i| -0.5 * (dh[i] * s.velocity[i] + s.depth[i] * du[i]) + s.velocity[i] * (dzb[i] + 0.5 * dh[i]))
            .collect()
    }

    /// `(4 mu du/dx, mu (dw/dx + 1/2 d(H + 2 z_b)/dx du/dx))`: the normal
    /// stress difference and the shear stress, zero in dry cells.
    pub fn stresses(&self, s: &SvState) -> (Vec<f64>, Vec<f64>) {
        let d = self.diff();
        let w = self.mean_vertical_velocity(s);
        let (dw, du, dh, dzb) = (d.first(&w), d.first(&s.velocity), d.first(&s.depth), d.first(&self.bottom));
        let n = s.depth.len();
        let mut normal = vec![0.0; n];
        let mut shear = vec![0.0; n];
        for i in 0..n {
            if s.depth[i] <= DRY || self.mu == 0.0 {
                continue;
            }
            normal[i] = 4.0 * self.mu * du[i];
            shear[i] = self.mu * (dw[i] + (dzb[i] + 0.5 * dh[i]) * du[i]);
        }
        (normal, shear)
    }

    fn neighbours(&self, s: &SvState, j: usize) -> ((f64, f64, f64), (f64, f64, f64)) {
        let n = s.depth.len();
        let cell = |i: usize, sign: f64| (s.depth[i], sign * s.velocity[i], self.bottom[i]);
        let mirror = if self.mesh.boundary == BoundaryKind::Wall { -1.0 } else { 1.0 };
        match (j, self.mesh.boundary) {
            (0, BoundaryKind::Periodic) => (cell(n - 1, 1.0), cell(0, 1.0)),
            (0, _) => (cell(0, mirror), cell(0, 1.0)),
            (j, BoundaryKind::Periodic) if j == n => (cell(n - 1, 1.0), cell(0, 1.0)),
            (j, _) if j == n => (cell(n - 1, 1.0), cell(n - 1, mirror)),
            (j, _) => (cell(j - 1, 1.0), cell(j, 1.0)),
        }
    }

    pub fn rhs(&self, s: &SvState) -> Result<SvRhs> {
        let n = s.depth.len();
        if n != self.mesh.n_cells || self.bottom.len() != n {
            return Err(Error::Input("single-layer state does not match the mesh".into()));
        }
        let g = self.g;
        let inv_dx = 1.0 / self.mesh.dx();

        // (mass, momentum seen from the left cell, momentum seen from the right cell)
        let mut edge = Vec::with_capacity(n + 1);
        for j in 0..=n {
            let ((hl, ul, bl), (hr, ur, br)) = self.neighbours(s, j);
            let top = bl.max(br);
            let hl_star = (hl + bl - top).max(0.0);
            let hr_star = (hr + br - top).max(0.0);
            if !(hl_star.is_finite() && hr_star.is_finite() && ul.is_finite() && ur.is_finite()) {
                return Err(Error::NonFiniteTrace { interface: j });
            }
            let (fm, fq) = hll(hl_star, ul, hr_star, ur, g);
            let to_left = fq + 0.5 * g * (hl * hl - hl_star * hl_star);
            let to_right = fq + 0.5 * g * (hr * hr - hr_star * hr_star);
            edge.push((fm, to_left, to_right));
        }

        let mut dh = vec![0.0; n];
        let mut dq = vec![0.0; n];
        for i in 0..n {
            let (west, east) = (edge[i], edge[i + 1]);
            dh[i] = -((east.0 - west.0) * inv_dx);
            dq[i] = -(east.1 - west.2) * inv_dx;
        }

        if self.mu > 0.0 || self.k_laminar != 0.0 || self.k_turbulent != 0.0 {
            let d = self.diff();
            let (normal, shear) = self.stresses(s);
            let moment: Vec<f64> = (0..n)
                .map(|i| s.depth[i] * (self.bottom[i] + 0.5 * s.depth[i]) * shear[i])
                .collect();
            let d_moment = d.first(&moment);
            let inner: Vec<f64> = (0..n).map(|i| s.depth[i] * normal[i] + d_moment[i]).collect();
            let d_inner = d.first(&inner);
            let h_shear: Vec<f64> = (0..n).map(|i| s.depth[i] * shear[i]).collect();
            let curv = d.second(&h_shear);
            let cos = self.bottom_cosine();
            for i in 0..n {
                let u = s.velocity[i];
                let friction = self.kappa(s.depth[i], u) * u / (cos[i] * cos[i] * cos[i]);
                dq[i] += d_inner[i] - self.bottom[i] * curv[i] - friction;
            }
        }
        Ok(SvRhs {
            depth: dh,
            discharge: dq,
        })
    }

    /// Per-cell right side of the energy balance:
    /// `-4 mu H (du/dx)^2 - mu H (dw/dx + 1/2 d(H+2z_b)/dx du/dx)^2 - kappa u^2 / c_b^3`.
    pub fn dissipation(&self, s: &SvState) -> Vec<f64> {
        let d = self.diff();
        let w = self.mean_vertical_velocity(s);
        let (dw, du, dh, dzb) = (d.first(&w), d.first(&s.velocity), d.first(&s.depth), d.first(&self.bottom));
        let cos = self.bottom_cosine();
        (0..s.depth.len())
            .map(|i| {
                let (h, u) = (s.depth[i], s.velocity[i]);
                let shear = dw[i] + (dzb[i] + 0.5 * dh[i]) * du[i];
                -4.0 * self.mu * h * du[i] * du[i]
                    - self.mu * h * shear * shear
                    - self.kappa(h, u) * u * u / (cos[i] * cos[i] * cos[i])
            })
            .collect()
    }

    fn update(&self, h: Vec<f64>, q: Vec<f64>) -> Result<SvState> {
        let mut depth = h;
        let mut velocity = vec![0.0; depth.len()];
        for i in 0..depth.len() {
            if !depth[i].is_finite() || !q[i].is_finite() || depth[i] < -1e-10 {
                return Err(Error::SolverAbort {
                    step: 0,
                    time: 0.0,
                    cell: i,
                    reason: format!("single-layer update gave H={}, q={}", depth[i], q[i]),
                });
            }
            if depth[i] < 0.0 {
                depth[i] = 0.0;
            }
            if depth[i] > DRY {
                velocity[i] = q[i] / depth[i];
            }
        }
        Ok(SvState { depth, velocity })
    }

    pub fn euler_step(&self, s: &SvState, dt: f64) -> Result<SvState> {
        let r = self.rhs(s)?;
        let q = s.discharge();
        let h1 = s.depth.iter().zip(&r.depth).map(|(h, d)| h + dt * d).collect();
        let q1 = q.iter().zip(&r.discharge).map(|(q, d)| q + dt * d).collect();
        self.update(h1, q1)
    }

    /// Heun's method in Shu-Osher form.
    pub fn ssp_rk2_step(&self, s: &SvState, dt: f64) -> Result<SvState> {
        let s1 = self.euler_step(s, dt)?;
        let s2 = self.euler_step(&s1, dt)?;
        let q0 = s.discharge();
        let q2 = s2.discharge();
        let h = s.depth.iter().zip(&s2.depth).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
        let q = q0.iter().zip(&q2).map(|(a, b)| 0.5 * a + 0.5 * b).collect();
        self.update(h, q)
    }

    /// Advective CFL step `cfl dx / max(|u| + sqrt(gH))` bounded by the
    /// same viscous limits as the multilayer loop.
    pub fn stable_dt(&self, s: &SvState, cfl: f64, safety: f64) -> f64 {
        let dx = self.mesh.dx();
        let mut speed: f64 = 0.0;
        let mut h_max: f64 = 0.0;
        let mut h_min = f64::INFINITY;
        for (h, u) in s.depth.iter().zip(&s.velocity) {
            if *h > DRY {
                speed = speed.max(u.abs() + (self.g * h).sqrt());
                h_max = h_max.max(*h);
                h_min = h_min.min(*h);
            }
        }
        let mut dt = if speed > 0.0 {
            cfl * dx / speed
        } else {
            cfl * dx / (self.g * DRY).sqrt()
        };
        if self.mu > 0.0 && h_min.is_finite() {
            let half = 0.5 * h_min;
            dt = dt.min(safety * half * half / (2.0 * self.mu));
            let horizontal = (dx * dx / (4.0 * self.mu)).min(dx.powi(4) / (4.0 * self.mu * h_max * h_max));
            dt = dt.min(safety * horizontal);
        }
        dt
    }
}
