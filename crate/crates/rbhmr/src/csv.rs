//! CSV writers. Floats are written with 17 significant digits so values
//! round-trip exactly.

use std::io::{self, Write};

use rbhmr_core::estimator::ErrorReport;
use rbhmr_core::interface::InterfaceCurve;
use rbhmr_core::rb::TrainingGrid;
use rbhmr_core::transverse::TransverseSnapshot;
use rbhmr_core::TensorGrid;

pub fn float(v: f64) -> String {
    format!("{v:.16e}")
}

fn row<W: Write>(w: &mut W, cells: impl IntoIterator<Item = String>) -> io::Result<()> {
    let line: Vec<String> = cells.into_iter().collect();
    writeln!(w, "{}", line.join(","))
}

pub fn write_reports<W: Write>(w: &mut W, reports: &[ErrorReport]) -> io::Result<()> {
    row(w, ErrorReport::HEADER.iter().map(|s| s.to_string()))?;
    for r in reports {
        row(
            w,
            [
                r.m.to_string(),
                float(r.err_v_rel),
                float(r.err_l2_rel),
                float(r.delta_m),
                float(r.e_pod),
                float(r.lambda_m),
                float(r.pbar_norm),
            ],
        )?;
    }
    Ok(())
}

/// Columns `x, y_lo, y_hi`; `y_hi` is empty for single-valued curves.
pub fn write_curve<W: Write>(w: &mut W, curve: &InterfaceCurve) -> io::Result<()> {
    row(w, ["x", "y_lo", "y_hi"].map(String::from))?;
    for (i, (&x, &lo)) in curve.xs.iter().zip(&curve.ys_lo).enumerate() {
        let hi = curve.ys_hi.as_ref().map(|h| float(h[i])).unwrap_or_default();
        row(w, [float(x), float(lo), hi])?;
    }
    Ok(())
}

/// Columns `mu_1..mu_Q, component, v_0..v_n`.
pub fn write_snapshots<W: Write>(w: &mut W, qbar: usize, snaps: &[TransverseSnapshot]) -> io::Result<()> {
    let nodes = snaps.first().map_or(0, |s| s.values.len());
    let header = (1..=qbar)
        .map(|l| format!("mu_{l}"))
        .chain(["component".to_string()])
        .chain((0..nodes).map(|j| format!("v_{j}")));
    row(w, header)?;
    for s in snaps {
        let cells =
            s.mu.iter()
                .map(|&m| float(m))
                .chain([s.component.to_string()])
                .chain(s.values.iter().map(|&v| float(v)));
        row(w, cells)?;
    }
    Ok(())
}

/// Columns `cell_id, lo_1..lo_Q, hi_1..hi_Q, rho, eta, sigma`.
pub fn write_training<W: Write>(w: &mut W, grid: &TrainingGrid) -> io::Result<()> {
    let q = grid.qbar();
    let header = ["cell_id".to_string()]
        .into_iter()
        .chain((1..=q).map(|l| format!("lo_{l}")))
        .chain((1..=q).map(|l| format!("hi_{l}")))
        .chain(["rho", "eta", "sigma"].map(String::from));
    row(w, header)?;
    for (id, c) in grid.cells.iter().enumerate() {
        let cells = [id.to_string()]
            .into_iter()
            .chain(c.lo.iter().map(|&v| float(v)))
            .chain(c.hi.iter().map(|&v| float(v)))
            .chain([c.rho.to_string(), float(c.eta), float(c.sigma)]);
        row(w, cells)?;
    }
    Ok(())
}

/// Columns `x, y, value` with `x` the slow index.
pub fn write_solution<W: Write>(w: &mut W, grid: &TensorGrid, values: &[f64]) -> io::Result<()> {
    row(w, ["x", "y", "value"].map(String::from))?;
    let ny = grid.ty.node_count();
    for (i, &x) in grid.tx.nodes().iter().enumerate() {
        for (j, &y) in grid.ty.nodes().iter().enumerate() {
            row(w, [float(x), float(y), float(values[i * ny + j])])?;
        }
    }
    Ok(())
}
