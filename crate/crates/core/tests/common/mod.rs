//! Oracles and fixtures shared by the integration tests. Nothing here calls
//! into the solver's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use layerflow::LayerPartition;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const G: f64 = 9.81;

/// `mean + sum_k a_k sin(2 pi k x / L + phi_k)`, periodic on `[0, L)`.
pub fn smooth_field(rng: &mut ChaCha8Rng, x: &[f64], length: f64, mean: f64, amplitude: f64) -> Vec<f64> {
    let modes: Vec<(f64, f64, f64)> = (1..=3)
        .map(|k| {
            let a = rng.gen_range(-amplitude..amplitude) / k as f64;
            (k as f64, a, rng.gen_range(0.0..2.0 * PI))
        })
        .collect();
    x.iter()
        .map(|x| mean + modes.iter().map(|(k, a, p)| a * (2.0 * PI * k * x / length + p).sin()).sum::<f64>())
        .collect()
}

pub fn random_partition(rng: &mut ChaCha8Rng, n: usize) -> LayerPartition {
    let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.3..1.7)).collect();
    let total: f64 = w.iter().sum();
    let mut f: Vec<f64> = w.iter().map(|v| v / total).collect();
    let head: f64 = f[..n - 1].iter().sum();
    f[n - 1] = 1.0 - head;
    LayerPartition::new(f).unwrap()
}

pub fn centers(x_min: f64, x_max: f64, n: usize) -> Vec<f64> {
    let dx = (x_max - x_min) / n as f64;
    (0..n).map(|i| x_min + (i as f64 + 0.5) * dx).collect()
}

/// Centered difference on a periodic grid.
pub fn ddx_periodic(f: &[f64], dx: f64) -> Vec<f64> {
    let n = f.len();
    (0..n).map(|i| (f[(i + 1) % n] - f[(i + n - 1) % n]) / (2.0 * dx)).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Ritter dam break over a dry bed: depth at `(x, t)` for a reservoir of
/// depth `h0` released at `x0`. Inside the fan the Riemann invariant
/// `u + 2c = 2 c0` and the similarity relation `x/t = u - c` give
/// `c = (2 c0 - x/t) / 3`.
pub fn ritter(x: f64, t: f64, x0: f64, h0: f64) -> f64 {
    let c0 = (G * h0).sqrt();
    let s = (x - x0) / t;
    if s < -c0 {
        h0
    } else if s < 2.0 * c0 {
        (2.0 * c0 - s).powi(2) / (9.0 * G)
    } else {
        0.0
    }
}

/// Cell average by 8 sub-intervals of 3-point Gauss-Legendre.
pub fn cell_average(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let nodes = [-(0.6f64).sqrt(), 0.0, (0.6f64).sqrt()];
    let weights = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let m = 8;
    let h = (b - a) / m as f64;
    let mut s = 0.0;
    for k in 0..m {
        let mid = a + (k as f64 + 0.5) * h;
        for (x, w) in nodes.iter().zip(weights) {
            s += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * s / m as f64
}

/// Single-layer HLL flux `(mass, momentum)` with speeds `u +- sqrt(g h)`.
pub fn hll(hl: f64, ul: f64, hr: f64, ur: f64) -> (f64, f64) {
    let (cl, cr) = ((G * hl).sqrt(), (G * hr).sqrt());
    let sl = (ul - cl).min(ur - cr);
    let sr = (ul + cl).max(ur + cr);
    let f = |h: f64, u: f64| (h * u, h * u * u + 0.5 * G * h * h);
    let (fl, fr) = (f(hl, ul), f(hr, ur));
    if sl >= 0.0 {
        fl
    } else if sr <= 0.0 {
        fr
    } else {
        let blend = |a: f64, b: f64, qa: f64, qb: f64| (sr * a - sl * b + sl * sr * (qb - qa)) / (sr - sl);
        (blend(fl.0, fr.0, hl, hr), blend(fl.1, fr.1, hl * ul, hr * ur))
    }
}

/// Vertical momentum diffusion in a column of uniform layers, stress-free
/// at both ends:
/// `h du_a/dt = mu [(u_{a+1} - u_a)/h - (u_a - u_{a-1})/h]`.
/// Integrated with classical RK4.
pub struct ColumnDiffusion {
    pub u: Vec<f64>,
    pub coef: f64,
}

impl ColumnDiffusion {
    pub fn new(u0: Vec<f64>, layer: f64, mu: f64) -> Self {
        Self {
            u: u0,
            coef: mu / (layer * layer),
        }
    }

    fn rate(&self, u: &[f64]) -> Vec<f64> {
        let n = u.len();
        (0..n)
            .map(|a| {
                let up = if a + 1 < n { u[a + 1] - u[a] } else { 0.0 };
                let down = if a > 0 { u[a] - u[a - 1] } else { 0.0 };
                self.coef * (up - down)
            })
            .collect()
    }

    pub fn advance(&mut self, dt: f64, steps: usize) {
        let axpy = |u: &[f64], k: &[f64], s: f64| -> Vec<f64> { u.iter().zip(k).map(|(a, b)| a + s * b).collect() };
        for _ in 0..steps {
            let k1 = self.rate(&self.u);
            let k2 = self.rate(&axpy(&self.u, &k1, 0.5 * dt));
            let k3 = self.rate(&axpy(&self.u, &k2, 0.5 * dt));
            let k4 = self.rate(&axpy(&self.u, &k3, dt));
            for a in 0..self.u.len() {
                self.u[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
            }
        }
    }
}

pub fn spread(u: &[f64]) -> f64 {
    let hi = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = u.iter().cloned().fold(f64::INFINITY, f64::min);
    hi - lo
}

/// Total mechanical energy `sum_i dx sum_a h_a (u_a^2/2 + g z_a)` with
/// `z_a` the layer midpoint.
pub fn mechanical_energy(depth: &[f64], velocity: &[Vec<f64>], bottom: &[f64], fractions: &[f64], dx: f64) -> f64 {
    let mut e = 0.0;
    for i in 0..depth.len() {
        let mut below = bottom[i];
        for (a, l) in fractions.iter().enumerate() {
            let h = l * depth[i];
            let u = velocity[a][i];
            e += dx * h * (0.5 * u * u + G * (below + 0.5 * h));
            below += h;
        }
    }
    e
}
