//! Discrete reduced problems on `X^H ⊗ Y_m` and the Riesz reconstructions
//! of the lifting.
//!
//! The reduced operator is assembled from y-moments of the coefficients
//! against the transverse modes, evaluated at the x-Gauss points of the
//! dominant mesh. The moments are computed once for the largest mode count
//! and leading blocks are reused for every smaller `m`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::{self, BandMatrix};
use crate::mesh::{Partition1D, TensorGrid};
use crate::problem::{
    assemble_load, assemble_mass, Formulation, LiftingFunction, LiftingMode, NodalField, ProblemData, RhsDensity,
};
use crate::rb::ReductionSpace;
use crate::{Error, Result};

/// y-moments at every x-Gauss point of `tx`.
///
/// For modes `φ_k` (trial) and `φ_l` (test), stored row-major as `[k][l]`:
/// `kdd = ∫ k φ_k' φ_l'`, `kvv = ∫ k φ_k φ_l`, `b1vv = ∫ b₁ φ_k φ_l`,
/// `b2dv = ∫ b₂ φ_k' φ_l`; right-hand side moments `r_v = ∫ g φ_l`,
/// `r_x = ∫ g_x φ_l`, `r_d = ∫ g_y φ_l'`.
#[derive(Debug, Clone)]
pub struct MomentTable {
    pub tx: Partition1D,
    pub ty: Partition1D,
    pub mode: LiftingMode,
    m: usize,
    kdd: Vec<f64>,
    kvv: Vec<f64>,
    b1vv: Vec<f64>,
    b2dv: Vec<f64>,
    r_v: Vec<f64>,
    r_x: Vec<f64>,
    r_d: Vec<f64>,
}

impl MomentTable {
    pub fn new(
        pd: &ProblemData,
        form: &Formulation,
        tx: &Partition1D,
        ty: &Partition1D,
        modes: &[Vec<f64>],
    ) -> Result<Self> {
        Self::build(pd, form, tx, ty, modes, None)
    }

    /// Table for `modes ++ extra` reusing the entries of `self`, which must
    /// have been built from `modes`.
    pub fn extended(
        &self,
        pd: &ProblemData,
        form: &Formulation,
        modes: &[Vec<f64>],
        extra: &[Vec<f64>],
    ) -> Result<Self> {
        if modes.len() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: modes.len(),
            });
        }
        let mut funcs = modes.to_vec();
        funcs.extend_from_slice(extra);
        Self::build(pd, form, &self.tx.clone(), &self.ty.clone(), &funcs, Some(self))
    }

    fn build(
        pd: &ProblemData,
        form: &Formulation,
        tx: &Partition1D,
        ty: &Partition1D,
        modes: &[Vec<f64>],
        base: Option<&MomentTable>,
    ) -> Result<Self> {
        let m = modes.len();
        if m == 0 {
            return Err(Error::invalid("reduction space is empty"));
        }
        for phi in modes {
            if phi.len() != ty.node_count() {
                return Err(Error::DimensionMismatch {
                    expected: ty.node_count(),
                    found: phi.len(),
                });
            }
        }
        let mb = base.map_or(0, |b| b.m);
        let nq = 2 * tx.elements();
        let mut t = MomentTable {
            tx: tx.clone(),
            ty: ty.clone(),
            mode: form.mode,
            m,
            kdd: vec![0.0; nq * m * m],
            kvv: vec![0.0; nq * m * m],
            b1vv: vec![0.0; nq * m * m],
            b2dv: vec![0.0; nq * m * m],
            r_v: vec![0.0; nq * m],
            r_x: vec![0.0; nq * m],
            r_d: vec![0.0; nq * m],
        };
        if let Some(b) = base {
            for q in 0..nq {
                for k in 0..mb {
                    let src = q * mb * mb + k * mb;
                    let dst = q * m * m + k * m;
                    t.kdd[dst..dst + mb].copy_from_slice(&b.kdd[src..src + mb]);
                    t.kvv[dst..dst + mb].copy_from_slice(&b.kvv[src..src + mb]);
                    t.b1vv[dst..dst + mb].copy_from_slice(&b.b1vv[src..src + mb]);
                    t.b2dv[dst..dst + mb].copy_from_slice(&b.b2dv[src..src + mb]);
                }
                t.r_v[q * m..q * m + mb].copy_from_slice(&b.r_v[q * mb..(q + 1) * mb]);
                t.r_x[q * m..q * m + mb].copy_from_slice(&b.r_x[q * mb..(q + 1) * mb]);
                t.r_d[q * m..q * m + mb].copy_from_slice(&b.r_d[q * mb..(q + 1) * mb]);
            }
        }
        let hy = ty.spacing();
        let mut val = vec![0.0; m];
        let mut der = vec![0.0; m];
        for e in 0..tx.elements() {
            for (g, (x, _)) in tx.gauss_points(e).into_iter().enumerate() {
                let q = 2 * e + g;
                let mm = q * m * m..(q + 1) * m * m;
                let (kdd, kvv) = (&mut t.kdd[mm.clone()], &mut t.kvv[mm.clone()]);
                let (b1vv, b2dv) = (&mut t.b1vv[mm.clone()], &mut t.b2dv[mm]);
                let rv = q * m..(q + 1) * m;
                let (r_v, r_x, r_d) = (&mut t.r_v[rv.clone()], &mut t.r_x[rv.clone()], &mut t.r_d[rv]);
                for ey in 0..ty.elements() {
                    for k in 0..m {
                        der[k] = (modes[k][ey + 1] - modes[k][ey]) / hy;
                    }
                    for (y, w) in ty.gauss_points(ey) {
                        let s = (y - ty.node(ey)) / hy;
                        for k in 0..m {
                            val[k] = (1.0 - s) * modes[k][ey] + s * modes[k][ey + 1];
                        }
                        let kc = pd.diffusion_at(x, y)?;
                        let b1 = pd.b1.eval(x, y);
                        let b2 = pd.b2.eval(x, y);
                        let d = form.rhs_density(pd, x, y, kc);
                        let (wk, w1, w2) = (w * kc, w * b1, w * b2);
                        for k in 0..m {
                            let (vk, dk) = (val[k], der[k]);
                            let row = k * m;
                            let first = if k < mb { mb } else { 0 };
                            for l in first..m {
                                kdd[row + l] += wk * dk * der[l];
                                kvv[row + l] += wk * vk * val[l];
                                b1vv[row + l] += w1 * vk * val[l];
                                b2dv[row + l] += w2 * dk * val[l];
                            }
                            if k >= mb {
                                r_v[k] += w * d.value * vk;
                                r_x[k] += w * d.dx * vk;
                                r_d[k] += w * d.dy * dk;
                            }
                        }
                    }
                }
            }
        }
        Ok(t)
    }

    pub fn mode_count(&self) -> usize {
        self.m
    }

    /// Reduced system using the first `m` modes.
    pub fn assemble(&self, m: usize) -> Result<ReducedSystem> {
        if m == 0 || m > self.m {
            return Err(Error::IndexOutOfRange {
                index: m,
                len: self.m + 1,
            });
        }
        let tx = &self.tx;
        let nx = tx.elements();
        let n = (nx - 1) * m;
        let bw = 2 * m - 1;
        let mut a = BandMatrix::zeros(n, bw, bw);
        let mut rhs = vec![0.0; n];
        let hx = tx.spacing();
        let big = self.m;
        for e in 0..nx {
            for (g, (x, wx)) in tx.gauss_points(e).into_iter().enumerate() {
                let q = 2 * e + g;
                let s = (x - tx.node(e)) / hx;
                let xi = [1.0 - s, s];
                let dxi = [-1.0 / hx, 1.0 / hx];
                let base = q * big * big;
                for c in 0..2 {
                    let ic = e + c;
                    if ic == 0 || ic == nx {
                        continue;
                    }
                    for l in 0..m {
                        let row = (ic - 1) * m + l;
                        let rq = q * big + l;
                        rhs[row] += wx * (xi[c] * self.r_v[rq] + dxi[c] * self.r_x[rq] + xi[c] * self.r_d[rq]);
                        for t in 0..2 {
                            let it = e + t;
                            if it == 0 || it == nx {
                                continue;
                            }
                            for k in 0..m {
                                let p = base + k * big + l;
                                let v = dxi[t] * dxi[c] * self.kvv[p]
                                    + xi[t] * xi[c] * self.kdd[p]
                                    + dxi[t] * xi[c] * self.b1vv[p]
                                    + xi[t] * xi[c] * self.b2dv[p];
                                a.add(row, (it - 1) * m + k, wx * v);
                            }
                        }
                    }
                }
            }
        }
        Ok(ReducedSystem {
            tx: tx.clone(),
            m,
            mode: self.mode,
            matrix: a,
            rhs,
        })
    }
}

/// Block system of the reduced problem; unknown `(i − 1)·m + k` is `p̄_k(x_i)`.
#[derive(Debug, Clone)]
pub struct ReducedSystem {
    pub tx: Partition1D,
    pub m: usize,
    pub mode: LiftingMode,
    pub matrix: BandMatrix,
    pub rhs: Vec<f64>,
}

/// `p_m^H = Σ_k p̄_k(x) φ_k(y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSolution {
    pub space: ReductionSpace,
    /// `coeffs[k][i − 1] = p̄_k(x_i)` for interior nodes `x_i`.
    pub coeffs: Vec<Vec<f64>>,
    pub mode: LiftingMode,
    pub grid: TensorGrid,
}

impl ReducedSolution {
    pub fn m(&self) -> usize {
        self.coeffs.len()
    }

    /// Values at all grid nodes (zero on the boundary).
    pub fn nodal_values(&self) -> Vec<f64> {
        let nx = self.grid.tx.elements();
        let ny = self.grid.ty.elements();
        let mut out = vec![0.0; self.grid.node_count()];
        for (k, pbar) in self.coeffs.iter().enumerate() {
            let phi = &self.space.modes[k];
            for i in 1..nx {
                let c = pbar[i - 1];
                for j in 0..=ny {
                    out[self.grid.node_index(i, j)] += c * phi[j];
                }
            }
        }
        out
    }

    pub fn interior_values(&self) -> Vec<f64> {
        self.grid.restrict_interior(&self.nodal_values())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.space.modes)
            .map(|(pbar, phi)| {
                let mut full = vec![0.0; pbar.len() + 2];
                full[1..=pbar.len()].copy_from_slice(pbar);
                self.grid.tx.interpolate(&full, x) * self.space.ty.interpolate(phi, y)
            })
            .sum()
    }

    /// `‖p̄_k‖_{L²(Ω_1D)}` of the `k`-th coefficient function (0-based).
    pub fn pbar_norm(&self, k: usize) -> f64 {
        let p = &self.coeffs[k];
        let h = self.grid.tx.spacing();
        let n = p.len();
        let mut s = 0.0;
        for i in 0..=n {
            let a = if i == 0 { 0.0 } else { p[i - 1] };
            let b = if i == n { 0.0 } else { p[i] };
            s += h / 3.0 * (a * a + a * b + b * b);
        }
        s.max(0.0).sqrt()
    }
}

pub const REDUCED_TOLERANCE: f64 = 1e-10;

pub fn assemble_reduced(
    pd: &ProblemData,
    form: &Formulation,
    space: &ReductionSpace,
    th: &Partition1D,
) -> Result<ReducedSystem> {
    let table = MomentTable::new(pd, form, th, &space.ty, &space.modes)?;
    table.assemble(space.len())
}

/// Solves the reduced system; `space` must hold at least `system.m` modes.
pub fn solve_reduced(system: &ReducedSystem, space: &ReductionSpace, grid: &TensorGrid) -> Result<ReducedSolution> {
    if space.len() < system.m {
        return Err(Error::DimensionMismatch {
            expected: system.m,
            found: space.len(),
        });
    }
    let x = linalg::solve_checked(&system.matrix, &system.rhs, REDUCED_TOLERANCE)?;
    let m = system.m;
    let nx = system.tx.elements();
    let coeffs = (0..m).map(|k| (1..nx).map(|i| x[(i - 1) * m + k]).collect()).collect();
    Ok(ReducedSolution {
        space: space.truncated(m),
        coeffs,
        mode: system.mode,
        grid: grid.clone(),
    })
}

/// Interior nodal values of `Σ_k p̄_k φ_k` from a solution vector in the
/// reduced ordering, without building a [`ReducedSolution`].
pub(crate) fn prolongate(grid: &TensorGrid, modes: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let m = modes.len();
    let nx = grid.tx.elements();
    let ny = grid.ty.elements();
    let mut out = vec![0.0; grid.interior_count()];
    for i in 1..nx {
        for (k, phi) in modes.iter().enumerate() {
            let c = x[(i - 1) * m + k];
            for j in 1..ny {
                out[grid.interior_index(i, j)] += c * phi[j];
            }
        }
    }
    out
}

fn lifting_functional_density(pd: &ProblemData, lift: &LiftingFunction, x: f64, y: f64) -> Result<RhsDensity> {
    let k = pd.diffusion_at(x, y)?;
    let hx = lift.dx.eval(x, y);
    let hy = lift.dy.eval(x, y);
    Ok(RhsDensity {
        value: pd.b1.eval(x, y) * hx + pd.b2.eval(x, y) * hy,
        dx: k * hx,
        dy: k * hy,
    })
}

/// Field `R` with `∫ R v = a(h, v)` for all interior Q1 test functions;
/// boundary values are zero. For smooth `h`, `k = 1`, `b = 0` it
/// approximates `−Δh` away from the boundary.
pub fn riesz_lifting_reconstruction(pd: &ProblemData, lift: &LiftingFunction, grid: &TensorGrid) -> Result<NodalField> {
    let load = assemble_load(grid, |x, y| lifting_functional_density(pd, lift, x, y))?;
    let mass = assemble_mass(grid);
    let r = linalg::solve_checked(&mass, &load, 1e-12)?;
    Ok(NodalField {
        grid: grid.clone(),
        values: grid.extend_interior(&r),
    })
}

/// Riesz reconstruction on the strip `(μ − R, μ + R) × ω̂`, snapped outward
/// to grid nodes and clipped to `Ω`, restricted to the fiber `x = μ`.
/// Returns nodal values over `grid.ty`.
pub fn local_reconstruction(
    pd: &ProblemData,
    lift: &LiftingFunction,
    mu: f64,
    radius: f64,
    grid: &TensorGrid,
) -> Result<Vec<f64>> {
    let tx = &grid.tx;
    let h = tx.spacing();
    if !(radius >= h * (1.0 - 1e-12)) {
        return Err(Error::DegenerateStrip { radius, spacing: h });
    }
    if !tx.contains(mu) {
        return Err(Error::OutOfDomain(mu));
    }
    let lo = ((mu - radius - tx.start()) / h + 1e-9).floor().max(0.0) as usize;
    let hi = (((mu + radius - tx.start()) / h - 1e-9).ceil() as usize).min(tx.elements());
    if hi < lo + 2 {
        return Err(Error::DegenerateStrip { radius, spacing: h });
    }
    let strip = TensorGrid::new(
        Partition1D::uniform(tx.node(lo), tx.node(hi), hi - lo)?,
        grid.ty.clone(),
    );
    let field = riesz_lifting_reconstruction(pd, lift, &strip)?;
    Ok(grid.ty.nodes().iter().map(|&y| field.eval(mu, y)).collect())
}
