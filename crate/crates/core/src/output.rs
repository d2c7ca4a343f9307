//! CSV snapshots and energy series. Numbers carry 17 significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::energy::{budget_residuals, layer_energies, EnergySample};
use crate::error::Result;
use crate::solver::Solver;
use crate::state::{hydrostatic_pressures, LayerState};

fn num(out: &mut String, v: f64) {
    let _ = write!(out, "{v:.16e}");
}

/// Snapshot table: `x, zb, H, eta, u_*, w_*, G_*h, p_*, E_*`, one row per cell.
pub fn snapshot_csv(solver: &Solver, state: &LayerState) -> Result<String> {
    let eval = solver.evaluate(state)?;
    let g = solver.physics.gravity;
    let n = solver.n_layers();
    let p = hydrostatic_pressures(state, &solver.partition, g);
    let e = layer_energies(state, &eval.geometry, g);

    let mut header = vec!["x".to_string(), "zb".into(), "H".into(), "eta".into()];
    header.extend((1..=n).map(|a| format!("u_{a}")));
    header.extend((1..=n).map(|a| format!("w_{a}")));
    header.extend((1..n).map(|a| format!("G_{a}h")));
    header.extend((1..=n).map(|a| format!("p_{a}")));
    header.extend((1..=n).map(|a| format!("E_{a}")));

    let mut out = header.join(",");
    out.push('\n');
    for i in 0..solver.mesh.n_cells {
        let zb = solver.bathymetry.elevation[i];
        let mut row = vec![solver.mesh.center(i), zb, state.depth[i], zb + state.depth[i]];
        row.extend((0..n).map(|a| state.velocity[a][i]));
        row.extend((0..n).map(|a| eval.vertical.w[a][i]));
        row.extend((1..n).map(|k| eval.euler.exchange.rate[k][i]));
        row.extend((0..n).map(|a| p.layer[a][i]));
        row.extend((0..n).map(|a| e[a][i]));
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            num(&mut out, *v);
        }
        out.push('\n');
    }
    Ok(out)
}

pub fn write_snapshot(solver: &Solver, state: &LayerState, path: &Path) -> Result<()> {
    fs::write(path, snapshot_csv(solver, state)?)?;
    Ok(())
}

/// Energy table `t, E_total, D_G, R_E, friction, residual, mass`. The
/// residual of row `n` covers the step from `t_n` to `t_{n+1}` and is empty
/// on the last row.
pub fn energy_csv(samples: &[EnergySample]) -> String {
    let residuals = budget_residuals(samples);
    let mut out = String::from("t,E_total,D_G,R_E,friction,residual,mass\n");
    for (n, s) in samples.iter().enumerate() {
        for v in [s.time, s.total, s.exchange, s.viscous, s.friction] {
            num(&mut out, v);
            out.push(',');
        }
        if let Some(r) = residuals.get(n) {
            num(&mut out, *r);
        }
        out.push(',');
        num(&mut out, s.mass);
        out.push('\n');
    }
    out
}

pub fn write_energy_series(samples: &[EnergySample], path: &Path) -> Result<()> {
    fs::write(path, energy_csv(samples))?;
    Ok(())
}
