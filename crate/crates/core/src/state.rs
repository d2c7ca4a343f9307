//! Evolved unknowns and the algebraic closures of the layer-averaged system:
//! hydrostatic pressures, mass exchange between layers, and the upwind
//! interface velocity.

use crate::error::{Error, Result};
use crate::geometry::LayerPartition;

/// Columns at or below this depth are treated as dry.
pub const DRY_DEPTH: f64 = 1e-8;

/// Water depth per cell and one horizontal velocity per layer per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerState {
    pub depth: Vec<f64>,
    /// `velocity[layer][cell]`
    pub velocity: Vec<Vec<f64>>,
}

impl LayerState {
    pub fn new(depth: Vec<f64>, velocity: Vec<Vec<f64>>) -> Result<Self> {
        let n_cells = depth.len();
        if velocity.is_empty() {
            return Err(Error::Input("state needs at least one layer".into()));
        }
        if let Some(row) = velocity.iter().find(|v| v.len() != n_cells) {
            return Err(Error::Input(format!(
                "velocity row has {} cells, depth has {n_cells}",
                row.len()
            )));
        }
        if let Some(i) = depth.iter().position(|h| !h.is_finite() || *h < 0.0) {
            return Err(Error::Input(format!("invalid depth {} in cell {i}", depth[i])));
        }
        let mut s = Self { depth, velocity };
        s.dry_out();
        Ok(s)
    }

    /// Same velocity in every layer.
    pub fn uniform_velocity(depth: Vec<f64>, velocity: Vec<f64>, n_layers: usize) -> Result<Self> {
        Self::new(depth, vec![velocity; n_layers])
    }

    pub fn n_cells(&self) -> usize {
        self.depth.len()
    }

    pub fn n_layers(&self) -> usize {
        self.velocity.len()
    }

    /// Zeroes the velocities of dry columns.
    pub fn dry_out(&mut self) {
        for (i, h) in self.depth.iter().enumerate() {
            if *h <= DRY_DEPTH {
                for row in &mut self.velocity {
                    row[i] = 0.0;
                }
            }
        }
    }

    /// Discharge `q_alpha = l_alpha H u_alpha` of every layer.
    pub fn discharges(&self, part: &LayerPartition) -> Vec<Vec<f64>> {
        self.velocity
            .iter()
            .enumerate()
            .map(|(a, u)| {
                let l = part.fraction(a);
                u.iter().zip(&self.depth).map(|(u, h)| l * h * u).collect()
            })
            .collect()
    }

    /// Rebuilds a state from conservative variables.
    pub fn from_conservative(depth: Vec<f64>, discharge: &[Vec<f64>], part: &LayerPartition) -> Self {
        let velocity = discharge
            .iter()
            .enumerate()
            .map(|(a, q)| {
                let l = part.fraction(a);
                q.iter()
                    .zip(&depth)
                    .map(|(q, h)| if *h > DRY_DEPTH { q / (l * h) } else { 0.0 })
                    .collect()
            })
            .collect();
        Self { depth, velocity }
    }

    pub fn check_layers(&self, part: &LayerPartition) -> Result<()> {
        if self.n_layers() != part.n_layers() {
            return Err(Error::LayerMismatch {
                expected: part.n_layers(),
                got: self.n_layers(),
            });
        }
        Ok(())
    }
}

/// Hydrostatic pressure (divided by density) at layer midpoints and interfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureClosure {
    /// `p_alpha[layer][cell]`
    pub layer: Vec<Vec<f64>>,
    /// `p[interface][cell]`, interfaces `0..=N`; the surface entry is zero.
    pub interface: Vec<Vec<f64>>,
}

pub fn hydrostatic_pressures(state: &LayerState, part: &LayerPartition, g: f64) -> PressureClosure {
    let n = part.n_layers();
    let n_cells = state.n_cells();
    let mut layer = vec![vec![0.0; n_cells]; n];
    let mut interface = vec![vec![0.0; n_cells]; n + 1];
    for i in 0..n_cells {
        let h = part.thicknesses(state.depth[i]);
        let mut above = 0.0;
        for a in (0..n).rev() {
            interface[a + 1][i] = g * above;
            layer[a][i] = g * (0.5 * h[a] + above);
            above += h[a];
        }
        interface[0][i] = g * above;
    }
    PressureClosure { layer, interface }
}

/// Mass exchange rates across interfaces together with the interface
/// velocities carried by the exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeFluxes {
    /// `G[interface][cell]`, interfaces `0..=N`; bottom and surface are zero.
    pub rate: Vec<Vec<f64>>,
    /// Upwind velocity at each interface; bottom and surface take the
    /// adjacent layer velocity.
    pub velocity: Vec<Vec<f64>>,
}

/// Exchange rates from the per-layer divergences of the mass fluxes.
///
/// Eliminating the time derivative of the depth with the total mass balance
/// gives `G_k = D_{<k} - L_k D_total`, where `D_{<k}` sums the divergences of
/// the layers below interface `k` and `L_k` is the fraction below it.
pub fn exchange_rates(mass_divergence: &[Vec<f64>], part: &LayerPartition) -> Result<Vec<Vec<f64>>> {
    let n = part.n_layers();
    if mass_divergence.len() != n {
        return Err(Error::LayerMismatch {
            expected: n,
            got: mass_divergence.len(),
        });
    }
    let n_cells = mass_divergence[0].len();
    let mut rate = vec![vec![0.0; n_cells]; n + 1];
    for i in 0..n_cells {
        let total: f64 = mass_divergence.iter().map(|d| d[i]).sum();
        let mut below = 0.0;
        for k in 1..n {
            below += mass_divergence[k - 1][i];
            rate[k][i] = below - part.below(k) * total;
        }
    }
    Ok(rate)
}

/// Upwind interface velocity: the lower layer when mass moves down or not
/// at all, the upper layer when it moves up.
pub fn interface_velocity(u_lower: f64, u_upper: f64, rate: f64) -> f64 {
    if rate <= 0.0 {
        u_lower
    } else {
        u_upper
    }
}

/// Arithmetic mean of the two adjacent layer velocities. Energy neutral but
/// without a maximum principle; only used for comparisons.
pub fn centered_interface_velocity(u_lower: f64, u_upper: f64) -> f64 {
    0.5 * (u_lower + u_upper)
}

pub fn exchange_fluxes(
    state: &LayerState,
    mass_divergence: &[Vec<f64>],
    part: &LayerPartition,
) -> Result<ExchangeFluxes> {
    state.check_layers(part)?;
    let rate = exchange_rates(mass_divergence, part)?;
    let n = part.n_layers();
    let n_cells = state.n_cells();
    let mut velocity = vec![vec![0.0; n_cells]; n + 1];
    for i in 0..n_cells {
        velocity[0][i] = state.velocity[0][i];
        velocity[n][i] = state.velocity[n - 1][i];
        for k in 1..n {
            velocity[k][i] =
                interface_velocity(state.velocity[k - 1][i], state.velocity[k][i], rate[k][i]);
        }
    }
    Ok(ExchangeFluxes { rate, velocity })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(depth: f64, u: &[f64]) -> LayerState {
        LayerState::new(vec![depth], u.iter().map(|v| vec![*v]).collect()).unwrap()
    }

    #[test]
    fn single_layer_pressure() {
        let part = LayerPartition::uniform(1).unwrap();
        let p = hydrostatic_pressures(&state(2.0, &[0.0]), &part, 10.0);
        assert_eq!(p.layer[0][0], 10.0);
        assert_eq!(p.interface[1][0], 0.0);
        assert_eq!(p.interface[0][0], 20.0);
    }

    #[test]
    fn two_layer_pressure() {
        let part = LayerPartition::new(vec![0.5, 0.5]).unwrap();
        let p = hydrostatic_pressures(&state(2.0, &[0.0, 0.0]), &part, 10.0);
        assert_eq!(p.interface[1][0], 10.0);
        assert_eq!(p.layer[0][0], 15.0);
        assert_eq!(p.layer[1][0], 5.0);
        assert_eq!(p.interface[2][0], 0.0);
    }

    #[test]
    fn dry_pressure_vanishes() {
        let part = LayerPartition::uniform(3).unwrap();
        let p = hydrostatic_pressures(&state(0.0, &[1.0, 2.0, 3.0]), &part, 9.81);
        assert!(p.layer.iter().chain(&p.interface).all(|r| r[0] == 0.0));
    }

    #[test]
    fn dry_columns_lose_velocity() {
        let s = state(1e-9, &[1.0, 2.0]);
        assert_eq!(s.velocity[0][0], 0.0);
        assert_eq!(s.velocity[1][0], 0.0);
    }

    #[test]
    fn proportional_divergences_exchange_nothing() {
        let part = LayerPartition::new(vec![0.2, 0.3, 0.5]).unwrap();
        let total = 0.7;
        let div: Vec<Vec<f64>> = part.fractions().iter().map(|l| vec![l * total]).collect();
        let g = exchange_rates(&div, &part).unwrap();
        for k in 0..=3 {
            assert!(g[k][0].abs() < 1e-16);
        }
    }

    #[test]
    fn two_layer_exchange_value() {
        let part = LayerPartition::new(vec![0.5, 0.5]).unwrap();
        // D_{<=1} = 0.3, D_{<=2} = 0.4
        let g = exchange_rates(&[vec![0.3], vec![0.1]], &part).unwrap();
        assert!((g[1][0] - 0.1).abs() < 1e-15);
        assert_eq!(g[0][0], 0.0);
        assert_eq!(g[2][0], 0.0);
    }

    #[test]
    fn exchange_rejects_layer_mismatch() {
        let part = LayerPartition::uniform(3).unwrap();
        assert!(matches!(
            exchange_rates(&[vec![0.0], vec![0.0]], &part),
            Err(Error::LayerMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn upwind_branches() {
        assert_eq!(interface_velocity(1.0, 2.0, -0.5), 1.0);
        assert_eq!(interface_velocity(1.0, 2.0, 0.5), 2.0);
        assert_eq!(interface_velocity(1.0, 2.0, 0.0), 1.0);
    }

    proptest! {
        #[test]
        fn pressure_telescopes(depth in 0.0f64..100.0, n in 1usize..9, g in 0.1f64..20.0) {
            let part = LayerPartition::uniform(n).unwrap();
            let s = LayerState::new(vec![depth], vec![vec![0.0]; n]).unwrap();
            let p = hydrostatic_pressures(&s, &part, g);
            let h = part.thicknesses(depth);
            prop_assert_eq!(p.interface[n][0], 0.0);
            for a in 0..n {
                let drop = p.interface[a][0] - p.interface[a + 1][0];
                prop_assert!((drop - g * h[a]).abs() <= 1e-14 * (g * depth).max(1e-300) * 4.0);
                let half = p.layer[a][0] - p.interface[a + 1][0];
                prop_assert!((half - 0.5 * g * h[a]).abs() <= 1e-14 * (g * depth).max(1e-300) * 4.0);
                prop_assert!(p.layer[a][0] >= 0.0);
            }
        }

        #[test]
        fn exchange_endpoints_vanish(div in prop::collection::vec(-10.0f64..10.0, 1..9)) {
            let part = LayerPartition::uniform(div.len()).unwrap();
            let rows: Vec<Vec<f64>> = div.iter().map(|d| vec![*d]).collect();
            let g = exchange_rates(&rows, &part).unwrap();
            prop_assert_eq!(g[0][0], 0.0);
            prop_assert_eq!(g[div.len()][0], 0.0);
        }

        #[test]
        fn upwind_picks_an_endpoint(lo in -5.0f64..5.0, hi in -5.0f64..5.0, r in -1.0f64..1.0) {
            let v = interface_velocity(lo, hi, r);
            prop_assert!(v == lo || v == hi);
        }
    }
}
