//! Parametrized coupled 1D problems in the transverse direction.
//!
//! For a parameter vector `μ` of quadrature locations in `Ω_1D` the dominant
//! mesh is coarsened between consecutive points (artificial coupling), the
//! quadrature is augmented by midpoints of long elements, and the x-integrals
//! of the reference problem are replaced by that quadrature. The result is a
//! block system for one transverse function per active hat function.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{self, BandMatrix};
use crate::mesh::{hat, Partition1D};
use crate::problem::{Formulation, ProblemData};
use crate::{Error, Result};

const NODE_TOL: f64 = 1e-9;

/// Augmented quadrature in the dominant direction.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub qbar: usize,
    pub qhat: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Modified dominant-direction basis after node deletion.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledBasis {
    pub base: Partition1D,
    /// Indices into `base` of the nodes that survive deletion.
    pub kept_nodes: Vec<usize>,
    /// Positions in `kept_nodes` of the active (interior) hat functions.
    pub active: Vec<usize>,
    coords: Vec<f64>,
}

impl CoupledBasis {
    pub fn kept_coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Value and derivative of the `c`-th active function at `x`.
    pub fn eval(&self, c: usize, x: f64) -> (f64, f64) {
        hat(&self.coords, self.active[c], x)
    }

    /// Coordinate of the node carrying the `c`-th active function.
    pub fn active_node(&self, c: usize) -> f64 {
        self.coords[self.active[c]]
    }
}

/// One transverse function `P_i(μ)` of a coupled solve.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseSnapshot {
    pub mu: Vec<f64>,
    pub component: usize,
    /// Nodal values over the transverse partition, boundary entries zero.
    pub values: Vec<f64>,
}

/// Position of `x` in units of the spacing, snapped to integers within a
/// relative tolerance.
fn grid_coordinate(th: &Partition1D, x: f64) -> f64 {
    let t = (x - th.start()) / th.spacing();
    let r = t.round();
    if (t - r).abs() < NODE_TOL {
        r
    } else {
        t
    }
}

fn floor_index(th: &Partition1D, x: f64) -> i64 {
    grid_coordinate(th, x).floor() as i64
}

fn ceil_index(th: &Partition1D, x: f64) -> i64 {
    grid_coordinate(th, x).ceil() as i64
}

/// Sorts `μ` and checks the domain and same-element conditions.
pub fn sorted_parameters(th: &Partition1D, mu: &[f64]) -> Result<Vec<f64>> {
    if mu.is_empty() {
        return Err(Error::invalid("parameter vector is empty"));
    }
    let mut s = mu.to_vec();
    for &m in &s {
        if !m.is_finite() || !th.contains(m) {
            return Err(Error::OutOfDomain(m));
        }
    }
    s.sort_by(f64::total_cmp);
    let n = th.elements() as i64;
    for w in s.windows(2) {
        let e0 = floor_index(th, w[0]).min(n - 1);
        let e1 = floor_index(th, w[1]).min(n - 1);
        if e0 == e1 {
            return Err(Error::SameElement {
                first: w[0],
                second: w[1],
            });
        }
    }
    Ok(s)
}

/// Deletes the nodes strictly between `⌈μ_l/H⌉H` and `⌊μ_{l+1}/H⌋H` for all
/// consecutive pairs and activates the interior hats whose open support
/// contains a parameter value.
pub fn build_coupled_basis(th: &Partition1D, mu: &[f64]) -> Result<CoupledBasis> {
    let s = sorted_parameters(th, mu)?;
    let n = th.elements();
    let mut keep = vec![true; n + 1];
    for w in s.windows(2) {
        let a = ceil_index(th, w[0]);
        let b = floor_index(th, w[1]);
        for i in (a + 1).max(1)..b {
            keep[i as usize] = false;
        }
    }
    let kept_nodes: Vec<usize> = (0..=n).filter(|&i| keep[i]).collect();
    let coords: Vec<f64> = kept_nodes.iter().map(|&i| th.node(i)).collect();
    let last = coords.len() - 1;
    let active = (1..last)
        .filter(|&p| {
            let (l, r) = (coords[p - 1], coords[p + 1]);
            s.iter().any(|&m| m > l && m < r)
        })
        .collect();
    Ok(CoupledBasis {
        base: th.clone(),
        kept_nodes,
        active,
        coords,
    })
}

/// Adds the midpoint of every consecutive pair `μ_l, μ_{l+1}` with
/// `⌊μ_{l+1}/H⌋ − ⌊μ_l/H⌋ ≥ 2` and assigns weights.
///
/// Each point owns the part of `Ω_1D` closer to it than to its neighbours,
/// except that a kept node lying between two points is used as the split
/// instead of their midpoint. The first and last regions extend to the
/// domain ends, so the weights are positive and sum to `|Ω_1D|`.
pub fn augment_quadrature(mu: &[f64], th: &Partition1D) -> Result<QuadratureRule> {
    let s = sorted_parameters(th, mu)?;
    let cb = build_coupled_basis(th, &s)?;
    let mut points = s.clone();
    for w in s.windows(2) {
        if floor_index(th, w[1]) - floor_index(th, w[0]) >= 2 {
            points.push(0.5 * (w[0] + w[1]));
        }
    }
    let qbar = s.len();
    let qhat = points.len() - qbar;
    points.sort_by(f64::total_cmp);

    let kept = cb.kept_coords();
    let mut splits = Vec::with_capacity(points.len() + 1);
    splits.push(th.start());
    for w in points.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let split = kept
            .iter()
            .copied()
            .filter(|&x| x >= w[0] && x <= w[1])
            .min_by(|a, b| (a - mid).abs().total_cmp(&(b - mid).abs()))
            .unwrap_or(mid);
        splits.push(split);
    }
    splits.push(th.end());
    let weights = splits.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(QuadratureRule {
        points,
        weights,
        qbar,
        qhat,
    })
}

/// Assembled block system; unknown `(j − 1)·|χ| + c` is the value of the
/// `c`-th transverse function at interior node `j`.
#[derive(Debug, Clone)]
pub struct CoupledTransverseSystem {
    pub mu: Vec<f64>,
    pub basis: CoupledBasis,
    pub rule: QuadratureRule,
    pub yh: Partition1D,
    pub matrix: BandMatrix,
    pub rhs: Vec<f64>,
}

impl CoupledTransverseSystem {
    pub fn unknowns(&self) -> usize {
        self.rhs.len()
    }
}

pub fn assemble_transverse(
    pd: &ProblemData,
    form: &Formulation,
    cb: &CoupledBasis,
    rule: &QuadratureRule,
    yh: &Partition1D,
    mu: &[f64],
) -> Result<CoupledTransverseSystem> {
    let nc = cb.active_count();
    if nc == 0 {
        return Err(Error::invalid("no active basis function"));
    }
    let ny = yh.elements();
    let n = nc * (ny - 1);
    let mut a = BandMatrix::zeros(n, 2 * nc - 1, 2 * nc - 1);
    let mut rhs = vec![0.0; n];
    let hy = yh.spacing();
    let dof = |j: usize, c: usize| -> Option<usize> {
        if j == 0 || j == ny {
            None
        } else {
            Some((j - 1) * nc + c)
        }
    };

    for (&xq, &alpha) in rule.points.iter().zip(&rule.weights) {
        let xi: Vec<(f64, f64)> = (0..nc).map(|c| cb.eval(c, xq)).collect();
        if xi.iter().all(|&(v, d)| v == 0.0 && d == 0.0) {
            continue;
        }
        for e in 0..ny {
            for (yq, wy) in yh.gauss_points(e) {
                let k = pd.diffusion_at(xq, yq)?;
                let b1 = pd.b1.eval(xq, yq);
                let b2 = pd.b2.eval(xq, yq);
                let d = form.rhs_density(pd, xq, yq, k);
                let t = (yq - yh.node(e)) / hy;
                let ups = [1.0 - t, t];
                let dups = [-1.0 / hy, 1.0 / hy];
                let w = alpha * wy;
                for (tc, &(zk, dzk)) in xi.iter().enumerate() {
                    for c in 0..2 {
                        let Some(row) = dof(e + c, tc) else { continue };
                        rhs[row] += w * (d.value * zk * ups[c] + d.dx * dzk * ups[c] + d.dy * zk * dups[c]);
                        for (ti, &(zi, dzi)) in xi.iter().enumerate() {
                            let xx = k * zi * zk;
                            let dd = k * dzi * dzk;
                            let bx = b1 * dzi * zk;
                            let by = b2 * zi * zk;
                            if xx == 0.0 && dd == 0.0 && bx == 0.0 && by == 0.0 {
                                continue;
                            }
                            for a_ in 0..2 {
                                let Some(col) = dof(e + a_, ti) else { continue };
                                let v = xx * dups[a_] * dups[c]
                                    + dd * ups[a_] * ups[c]
                                    + bx * ups[a_] * ups[c]
                                    + by * dups[a_] * ups[c];
                                a.add(row, col, w * v);
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(CoupledTransverseSystem {
        mu: mu.to_vec(),
        basis: cb.clone(),
        rule: rule.clone(),
        yh: yh.clone(),
        matrix: a,
        rhs,
    })
}

pub const SNAPSHOT_TOLERANCE: f64 = 1e-10;

/// Solves the block system and splits it into one snapshot per active function.
pub fn snapshot_solve(system: &CoupledTransverseSystem) -> Result<Vec<TransverseSnapshot>> {
    let fail = |e: Error| Error::SnapshotFailure {
        mu: system.mu.clone(),
        cause: e.to_string(),
    };
    let x = linalg::solve_checked(&system.matrix, &system.rhs, SNAPSHOT_TOLERANCE).map_err(fail)?;
    let nc = system.basis.active_count();
    let ny = system.yh.elements();
    Ok((0..nc)
        .map(|c| {
            let mut values = vec![0.0; ny + 1];
            for j in 1..ny {
                values[j] = x[(j - 1) * nc + c];
            }
            TransverseSnapshot {
                mu: system.mu.clone(),
                component: c,
                values,
            }
        })
        .collect())
}

/// Builds basis, quadrature and system for `μ` and returns its snapshots.
pub fn compute_snapshots(
    pd: &ProblemData,
    form: &Formulation,
    th: &Partition1D,
    yh: &Partition1D,
    mu: &[f64],
) -> Result<Vec<TransverseSnapshot>> {
    let cb = build_coupled_basis(th, mu)?;
    let rule = augment_quadrature(mu, th)?;
    let sys = assemble_transverse(pd, form, &cb, &rule, yh, mu)?;
    snapshot_solve(&sys)
}
