//! Residual-based estimator `Δ_m` and the error norms of reduced solutions.
//!
//! The Riesz representative of the residual is taken in the V-inner product
//! given by the symmetric part of the discrete operator, so the coercivity
//! constant is one and `‖e_m‖_V ≤ Δ_m`, with equality when `b = 0`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::mesh::TensorGrid;
use crate::problem::{FullSolution, ReferenceModel};
use crate::rb::ReductionSpace;
use crate::reduced::{MomentTable, ReducedSolution};
use crate::{Error, Result};

/// One row of an m-sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub m: usize,
    pub err_v_rel: f64,
    pub err_l2_rel: f64,
    pub delta_m: f64,
    pub e_pod: f64,
    pub lambda_m: f64,
    pub pbar_norm: f64,
}

impl ErrorReport {
    pub const HEADER: [&'static str; 7] = [
        "m",
        "err_V_rel",
        "err_L2_rel",
        "delta_m",
        "e_pod",
        "lambda_m",
        "pbar_norm",
    ];
}

/// Interior nodal values of `R_m` with `(R_m, v)_V = f(v) − a(h, v) − a(p_m, v)`.
pub fn riesz_residual(model: &ReferenceModel, pm_interior: &[f64]) -> Result<Vec<f64>> {
    let n = model.grid().interior_count();
    if pm_interior.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: pm_interior.len(),
        });
    }
    Ok(model.gram_lu.solve(&model.residual(pm_interior)))
}

/// `Δ_m = ‖R_m‖_V`.
pub fn delta_m(model: &ReferenceModel, r: &[f64]) -> f64 {
    model.v_norm(r)
}

/// `Δ_m` of an approximation given by interior nodal values.
pub fn delta_for(model: &ReferenceModel, pm_interior: &[f64]) -> Result<f64> {
    let r = riesz_residual(model, pm_interior)?;
    Ok(delta_m(model, &r))
}

/// Errors of `rsol` against the reference, the estimator and POD data of
/// `rsol.space` (which carries the eigenvalues when built by POD).
pub fn error_report(model: &ReferenceModel, reference: &FullSolution, rsol: &ReducedSolution) -> Result<ErrorReport> {
    if rsol.mode != reference.lifting_mode || rsol.mode != model.form.mode {
        return Err(Error::invalid("lifting modes of the solutions differ"));
    }
    if rsol.grid != reference.grid {
        return Err(Error::invalid("reduced and reference grids differ"));
    }
    let p = reference.interior();
    let pm = rsol.interior_values();
    report_from_values(model, &p, &pm, &rsol.space, rsol.m(), rsol.pbar_norm(rsol.m() - 1))
}

fn report_from_values(
    model: &ReferenceModel,
    p: &[f64],
    pm: &[f64],
    space: &ReductionSpace,
    m: usize,
    pbar_norm: f64,
) -> Result<ErrorReport> {
    let pv = model.v_norm(p);
    let pl = model.l2_norm(p);
    if !(pv > 0.0) || !(pl > 0.0) {
        return Err(Error::ZeroReferenceNorm);
    }
    let e: Vec<f64> = p.iter().zip(pm).map(|(a, b)| a - b).collect();
    let delta = delta_for(model, pm)?;
    Ok(ErrorReport {
        m,
        err_v_rel: model.v_norm(&e) / pv,
        err_l2_rel: model.l2_norm(&e) / pl,
        delta_m: delta,
        e_pod: space.pod_tail.get(m - 1).copied().unwrap_or(0.0),
        lambda_m: space.eigenvalues.get(m - 1).copied().unwrap_or(0.0),
        pbar_norm,
    })
}

/// Reports for `m = 1..=m_max` with nested spaces, sharing one moment table.
pub fn m_sweep(
    model: &ReferenceModel,
    reference: &FullSolution,
    space: &ReductionSpace,
    m_max: usize,
) -> Result<Vec<ErrorReport>> {
    let m_max = m_max.min(space.len());
    if m_max == 0 {
        return Err(Error::EmptySnapshots);
    }
    let grid = model.grid();
    let table = MomentTable::new(&model.pd, &model.form, &grid.tx, &space.ty, &space.modes[..m_max])?;
    let p = reference.interior();
    let mut out = Vec::with_capacity(m_max);
    for m in 1..=m_max {
        let rsol = sweep_solution(&table, space, grid, m)?;
        let pm = rsol.interior_values();
        out.push(report_from_values(model, &p, &pm, space, m, rsol.pbar_norm(m - 1))?);
    }
    Ok(out)
}

/// Reduced solution with the first `m` modes from a shared table.
pub fn sweep_solution(
    table: &MomentTable,
    space: &ReductionSpace,
    grid: &TensorGrid,
    m: usize,
) -> Result<ReducedSolution> {
    let sys = table.assemble(m)?;
    crate::reduced::solve_reduced(&sys, space, grid)
}

/// `‖p‖_V` and `‖p‖_{L²}` of interior nodal values.
pub fn norms(model: &ReferenceModel, u: &[f64]) -> (f64, f64) {
    (model.v_norm(u), model.l2_norm(u))
}

/// `max_i |u_i − v_i|`.
pub fn max_abs_diff(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
