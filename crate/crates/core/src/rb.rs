//! Reduction spaces from snapshots: POD and the adaptive training-set
//! extension over the parameter domain `[Ω_1D]^Q̄`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::estimator;
use crate::linalg;
use crate::mesh::{Partition1D, TensorGrid};
use crate::problem::{Formulation, LiftingFunction, LiftingMode, ProblemData, ReferenceModel};
use crate::reduced::{self, MomentTable};
use crate::transverse::{self, TransverseSnapshot};
use crate::{Error, Result};

/// L²(ω̂)-orthonormal transverse modes.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionSpace {
    pub ty: Partition1D,
    /// Nodal values over `ty`, boundary entries zero.
    pub modes: Vec<Vec<f64>>,
    /// POD eigenvalues, nonincreasing; empty for spaces not built by POD.
    pub eigenvalues: Vec<f64>,
    /// `pod_tail[m − 1]` is the relative energy tail after `m` modes.
    pub pod_tail: Vec<f64>,
}

impl ReductionSpace {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn truncated(&self, m: usize) -> ReductionSpace {
        let m = m.min(self.len());
        ReductionSpace {
            ty: self.ty.clone(),
            modes: self.modes[..m].to_vec(),
            eigenvalues: self.eigenvalues.iter().take(m).copied().collect(),
            pod_tail: self.pod_tail.iter().take(m).copied().collect(),
        }
    }

    /// Orthonormalizes `functions` in L²(ω̂), dropping numerically dependent
    /// ones.
    pub fn orthonormalized(ty: &Partition1D, functions: &[Vec<f64>]) -> Result<ReductionSpace> {
        let mut modes: Vec<Vec<f64>> = Vec::new();
        for f in functions {
            if f.len() != ty.node_count() {
                return Err(Error::DimensionMismatch {
                    expected: ty.node_count(),
                    found: f.len(),
                });
            }
            if let Some(v) = orthogonalize_against(ty, &modes, f) {
                modes.push(v);
            }
        }
        if modes.is_empty() {
            return Err(Error::EmptySnapshots);
        }
        Ok(ReductionSpace {
            ty: ty.clone(),
            modes,
            eigenvalues: Vec::new(),
            pod_tail: Vec::new(),
        })
    }

    /// Orthonormal basis of the whole transverse FE space (interior hats).
    pub fn full(ty: &Partition1D) -> ReductionSpace {
        let n = ty.node_count();
        let hats: Vec<Vec<f64>> = (1..ty.elements())
            .map(|j| {
                let mut v = vec![0.0; n];
                v[j] = 1.0;
                v
            })
            .collect();
        Self::orthonormalized(ty, &hats).expect("hat functions are independent")
    }
}

/// `(u, v)_{L²}` of two P1 functions given by nodal values.
pub fn l2_inner(ty: &Partition1D, u: &[f64], v: &[f64]) -> f64 {
    let h = ty.spacing();
    let mut s = 0.0;
    for e in 0..ty.elements() {
        let (a0, a1, b0, b1) = (u[e], u[e + 1], v[e], v[e + 1]);
        s += h / 6.0 * (2.0 * a0 * b0 + a0 * b1 + a1 * b0 + 2.0 * a1 * b1);
    }
    s
}

/// Two passes of modified Gram–Schmidt; `None` if `f` is (numerically) in
/// the span of `basis`.
fn orthogonalize_against(ty: &Partition1D, basis: &[Vec<f64>], f: &[f64]) -> Option<Vec<f64>> {
    let n0 = l2_inner(ty, f, f).sqrt();
    if !(n0 > 0.0) || !n0.is_finite() {
        return None;
    }
    let mut v = f.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = l2_inner(ty, &v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
    }
    let n = l2_inner(ty, &v, &v).sqrt();
    if n <= 1e-10 * n0 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= n);
    Some(v)
}

/// Size of the POD space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PodTarget {
    Count(usize),
    /// Smallest `m` with relative energy tail `≤ ε`.
    Tolerance(f64),
}

// relative eigenvalue cutoff below which directions are treated as noise
const RANK_CUTOFF: f64 = 1e-13;

/// POD of nodal snapshots over `ty` with respect to the L²(ω̂) product.
///
/// Uses the snapshot correlation matrix when there are at most as many
/// snapshots as interior nodes and the covariance form otherwise; the
/// nonzero spectra coincide.
pub fn pod(ty: &Partition1D, snapshots: &[Vec<f64>], target: PodTarget) -> Result<ReductionSpace> {
    let ns = snapshots.len();
    if ns == 0 {
        return Err(Error::EmptySnapshots);
    }
    for s in snapshots {
        if s.len() != ty.node_count() {
            return Err(Error::DimensionMismatch {
                expected: ty.node_count(),
                found: s.len(),
            });
        }
    }
    let nd = ty.interior_count();
    let (values, mut modes) = if ns <= nd {
        pod_snapshot_route(ty, snapshots)
    } else {
        pod_covariance_route(ty, snapshots)?
    };
    let total: f64 = values.iter().filter(|v| **v > 0.0).sum();
    if !(total > 0.0) {
        return Err(Error::EmptySnapshots);
    }
    let rank = values.iter().take_while(|v| **v > RANK_CUTOFF * values[0]).count();
    let tails: Vec<f64> = {
        let mut acc = 0.0;
        let mut t: Vec<f64> = values
            .iter()
            .rev()
            .map(|v| {
                let r = acc;
                acc += v.max(0.0);
                r
            })
            .collect();
        t.reverse();
        t.into_iter().map(|r| (r / total).max(0.0).sqrt()).collect()
    };
    let m = match target {
        PodTarget::Count(m) => m.min(rank),
        PodTarget::Tolerance(eps) => (1..=rank).find(|&m| tails[m - 1] <= eps).unwrap_or(rank),
    };
    modes.truncate(m);
    // restore orthonormality lost to rounding in weakly excited modes
    let mut ortho: Vec<Vec<f64>> = Vec::with_capacity(m);
    for v in &modes {
        match orthogonalize_against(ty, &ortho, v) {
            Some(o) => ortho.push(o),
            None => break,
        }
    }
    let m = ortho.len();
    Ok(ReductionSpace {
        ty: ty.clone(),
        modes: ortho,
        eigenvalues: values[..m].to_vec(),
        pod_tail: tails[..m].to_vec(),
    })
}

/// Eigenvalues (descending) and modes from `C = SᵀMS`.
fn pod_snapshot_route(ty: &Partition1D, s: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let ns = s.len();
    let mut c = vec![0.0; ns * ns];
    for i in 0..ns {
        for j in i..ns {
            let v = l2_inner(ty, &s[i], &s[j]);
            c[i * ns + j] = v;
            c[j * ns + i] = v;
        }
    }
    let eig = linalg::symmetric_eigen(&c, ns);
    let n = ty.node_count();
    let modes = (0..ns)
        .map(|k| {
            let lam = eig.values[k];
            let mut phi = vec![0.0; n];
            if lam > 0.0 {
                let vk = eig.vector(k);
                for (i, si) in s.iter().enumerate() {
                    for (p, x) in phi.iter_mut().zip(si) {
                        *p += vk[i] * x;
                    }
                }
                let sc = 1.0 / lam.sqrt();
                phi.iter_mut().for_each(|p| *p *= sc);
            }
            phi
        })
        .collect();
    (eig.values, modes)
}

/// Eigenvalues and modes from `LᵀSSᵀL` with `M = LLᵀ` on interior nodes.
fn pod_covariance_route(ty: &Partition1D, s: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let nd = ty.interior_count();
    let h = ty.spacing();
    let mut mass = vec![0.0; nd * nd];
    for i in 0..nd {
        mass[i * nd + i] = 2.0 * h / 3.0;
        if i + 1 < nd {
            mass[i * nd + i + 1] = h / 6.0;
            mass[(i + 1) * nd + i] = h / 6.0;
        }
    }
    let l = linalg::cholesky(&mass, nd)?;
    // rows of Lᵀ S: z_i = Lᵀ s_i (interior part)
    let zs: Vec<Vec<f64>> = s
        .iter()
        .map(|si| {
            (0..nd)
                .map(|r| (r..nd).map(|c| l[c * nd + r] * si[c + 1]).sum())
                .collect()
        })
        .collect();
    let mut k = vec![0.0; nd * nd];
    for z in &zs {
        for a in 0..nd {
            if z[a] == 0.0 {
                continue;
            }
            for b in a..nd {
                k[a * nd + b] += z[a] * z[b];
            }
        }
    }
    for a in 0..nd {
        for b in 0..a {
            k[a * nd + b] = k[b * nd + a];
        }
    }
    let eig = linalg::symmetric_eigen(&k, nd);
    let modes = (0..nd)
        .map(|m| {
            let w = eig.vector(m);
            let x = linalg::solve_lower_transposed(&l, nd, &w);
            let mut phi = vec![0.0; nd + 2];
            phi[1..=nd].copy_from_slice(&x);
            phi
        })
        .collect();
    Ok((eig.values, modes))
}

/// POD over transverse snapshots.
pub fn pod_snapshots(ty: &Partition1D, snapshots: &[TransverseSnapshot], target: PodTarget) -> Result<ReductionSpace> {
    let v: Vec<Vec<f64>> = snapshots.iter().map(|s| s.values.clone()).collect();
    pod(ty, &v, target)
}

/// Runs independent jobs, returning results in job order.
pub trait Executor {
    fn map<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync;
}

/// Runs jobs one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync,
    {
        (0..n).map(f).collect()
    }
}

/// A training parameter with its cached snapshots and indicator value.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub mu: Vec<f64>,
    /// Empty when `μ` violates the one-point-per-element condition.
    pub snapshots: Vec<Vec<f64>>,
    pub solved: bool,
    pub delta: f64,
}

impl Sample {
    fn new(mu: Vec<f64>) -> Self {
        Self {
            mu,
            snapshots: Vec::new(),
            solved: false,
            delta: f64::INFINITY,
        }
    }
}

/// Hyper-rectangular cell of the training grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamCell {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub samples: Vec<Sample>,
    pub rho: usize,
    pub eta: f64,
    pub sigma: f64,
}

impl ParamCell {
    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }
}

/// Nonconforming hyper-rectangular grid with per-cell samples. Cell ids are
/// positions in `cells`.
#[derive(Debug, Clone)]
pub struct TrainingGrid {
    pub cells: Vec<ParamCell>,
    pub n_xi: usize,
    th: Partition1D,
    rng: ChaCha8Rng,
}

/// Uniform `f64` in `[0, 1)` from the top 53 bits.
fn uniform01(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

const SAMPLE_ATTEMPTS: usize = 64;

impl TrainingGrid {
    /// `divisions^Q̄` equal cells over `[a, b]^Q̄` of the dominant partition,
    /// each with `n_xi` samples.
    pub fn uniform(th: &Partition1D, qbar: usize, divisions: usize, n_xi: usize, seed: u64) -> Result<Self> {
        if qbar == 0 || divisions == 0 || n_xi == 0 {
            return Err(Error::invalid("qbar, divisions and n_xi must be positive"));
        }
        let (a, b) = (th.start(), th.end());
        let step = (b - a) / divisions as f64;
        let mut g = TrainingGrid {
            cells: Vec::new(),
            n_xi,
            th: th.clone(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        };
        let total = divisions.pow(qbar as u32);
        for idx in 0..total {
            let mut r = idx;
            let mut lo = vec![0.0; qbar];
            let mut hi = vec![0.0; qbar];
            for d in 0..qbar {
                let k = r % divisions;
                r /= divisions;
                lo[d] = a + k as f64 * step;
                hi[d] = if k + 1 == divisions {
                    b
                } else {
                    a + (k + 1) as f64 * step
                };
            }
            let samples = g.draw(&lo, &hi);
            g.cells.push(ParamCell {
                lo,
                hi,
                samples,
                rho: 0,
                eta: f64::INFINITY,
                sigma: 0.0,
            });
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn qbar(&self) -> usize {
        self.cells[0].lo.len()
    }

    pub fn sample_count(&self) -> usize {
        self.cells.iter().map(|c| c.samples.len()).sum()
    }

    /// `n_xi` uniform samples in the box; a draw with two coordinates in one
    /// element of the dominant partition is redrawn a bounded number of times.
    fn draw(&mut self, lo: &[f64], hi: &[f64]) -> Vec<Sample> {
        (0..self.n_xi)
            .map(|_| {
                let mut mu = Vec::new();
                for _ in 0..SAMPLE_ATTEMPTS {
                    mu = lo
                        .iter()
                        .zip(hi)
                        .map(|(a, b)| a + (b - a) * uniform01(&mut self.rng))
                        .collect();
                    if transverse::sorted_parameters(&self.th, &mu).is_ok() {
                        break;
                    }
                }
                Sample::new(mu)
            })
            .collect()
    }

    /// Bisects every marked cell in each direction, in place; unmarked cells
    /// age by one. Returns the ids of the new cells.
    pub fn refine(&mut self, marked: &BTreeSet<usize>) -> Vec<usize> {
        let old = core::mem::take(&mut self.cells);
        let mut fresh = Vec::new();
        for (id, cell) in old.into_iter().enumerate() {
            if !marked.contains(&id) {
                let mut c = cell;
                c.rho += 1;
                self.cells.push(c);
                continue;
            }
            let q = cell.lo.len();
            let mid: Vec<f64> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| 0.5 * (a + b)).collect();
            for bits in 0..(1usize << q) {
                let lo: Vec<f64> = (0..q)
                    .map(|d| if bits >> d & 1 == 0 { cell.lo[d] } else { mid[d] })
                    .collect();
                let hi: Vec<f64> = (0..q)
                    .map(|d| if bits >> d & 1 == 0 { mid[d] } else { cell.hi[d] })
                    .collect();
                let samples = self.draw(&lo, &hi);
                fresh.push(self.cells.len());
                self.cells.push(ParamCell {
                    lo,
                    hi,
                    samples,
                    rho: 0,
                    eta: f64::INFINITY,
                    sigma: 0.0,
                });
            }
        }
        fresh
    }

    /// All cached snapshots in cell and sample order.
    pub fn snapshots(&self) -> Vec<TransverseSnapshot> {
        let mut out = Vec::new();
        for c in &self.cells {
            for s in &c.samples {
                for (i, v) in s.snapshots.iter().enumerate() {
                    out.push(TransverseSnapshot {
                        mu: s.mu.clone(),
                        component: i,
                        values: v.clone(),
                    });
                }
            }
        }
        out
    }
}

/// Which cells [`mark`] selects by indicator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarkStrategy {
    /// The `⌈θ N_G⌉` cells with the smallest `η`.
    #[default]
    Smallest,
    /// The `⌈θ N_G⌉` cells with the largest `η`.
    Largest,
}

/// `⌈θ N_G⌉` cells by `η` (ties by id) together with every cell with
/// `σ > sigma_thres`. Cells with a non-finite `η` have no admissible sample
/// and rank last under either strategy.
pub fn mark(eta: &[f64], sigma: &[f64], theta: f64, sigma_thres: f64, strategy: MarkStrategy) -> BTreeSet<usize> {
    let n = eta.len();
    let count = ((theta * n as f64).ceil() as usize).min(n);
    let mut ids: Vec<usize> = (0..n).collect();
    ids.sort_by(|&a, &b| {
        let o = eta[a].total_cmp(&eta[b]);
        let o = match strategy {
            MarkStrategy::Smallest => o,
            MarkStrategy::Largest => o.reverse(),
        };
        eta[b].is_finite().cmp(&eta[a].is_finite()).then(o).then(a.cmp(&b))
    });
    let mut out: BTreeSet<usize> = ids.into_iter().take(count).collect();
    out.extend((0..n).filter(|&i| sigma[i] > sigma_thres));
    out
}

/// Everything the snapshot and indicator computations share.
#[derive(Debug, Clone)]
pub struct RbContext {
    pub pd: ProblemData,
    /// Formulation on the fine grid, used for snapshots.
    pub form: Formulation,
    pub th: Partition1D,
    pub yh: Partition1D,
    /// Reference model on the coarse `N_H' × n_h` grid.
    pub coarse: ReferenceModel,
}

impl RbContext {
    pub fn new(
        pd: &ProblemData,
        lift: &LiftingFunction,
        mode: LiftingMode,
        grid: &TensorGrid,
        nhp: usize,
    ) -> Result<Self> {
        let form = Formulation::new(pd, lift, mode, grid)?;
        Self::with_formulation(pd, lift, &form, grid, nhp)
    }

    pub fn with_formulation(
        pd: &ProblemData,
        lift: &LiftingFunction,
        form: &Formulation,
        grid: &TensorGrid,
        nhp: usize,
    ) -> Result<Self> {
        if nhp < 2 {
            return Err(Error::invalid("NHp must be at least 2"));
        }
        let cgrid = TensorGrid::new(
            Partition1D::uniform(grid.tx.start(), grid.tx.end(), nhp)?,
            grid.ty.clone(),
        );
        let cform = Formulation::new(pd, lift, form.mode, &cgrid)?;
        let coarse = ReferenceModel::new(pd, &cform, &cgrid)?;
        Ok(Self {
            pd: pd.clone(),
            form: form.clone(),
            th: grid.tx.clone(),
            yh: grid.ty.clone(),
            coarse,
        })
    }

    /// Snapshots at `μ`, or an empty list when `μ` is not admissible.
    pub fn snapshots_at(&self, mu: &[f64]) -> Result<Vec<Vec<f64>>> {
        match transverse::compute_snapshots(&self.pd, &self.form, &self.th, &self.yh, mu) {
            Ok(s) => Ok(s.into_iter().map(|s| s.values).collect()),
            Err(Error::SameElement { .. }) => Ok(Vec::new()),
            Err(e) => Err(e),
        }
    }

    /// Moments of the current modes on the coarse grid (`None` for `m = 0`).
    pub fn base_table(&self, modes: &[Vec<f64>]) -> Result<Option<MomentTable>> {
        if modes.is_empty() {
            return Ok(None);
        }
        MomentTable::new(&self.pd, &self.coarse.form, &self.coarse.grid().tx, &self.yh, modes).map(Some)
    }

    /// Coarse-grid estimator of the reduced solution in
    /// `span(modes ∪ snapshots)`.
    pub fn indicator(&self, modes: &[Vec<f64>], base: Option<&MomentTable>, snapshots: &[Vec<f64>]) -> Result<f64> {
        let mut extra: Vec<Vec<f64>> = Vec::new();
        for s in snapshots {
            let mut all = modes.to_vec();
            all.extend(extra.iter().cloned());
            if let Some(v) = orthogonalize_against(&self.yh, &all, s) {
                extra.push(v);
            }
        }
        let mut funcs = modes.to_vec();
        funcs.extend(extra.iter().cloned());
        let grid = self.coarse.grid();
        if funcs.is_empty() {
            let zero = vec![0.0; grid.interior_count()];
            return estimator::delta_for(&self.coarse, &zero);
        }
        let table = match base {
            Some(b) if extra.is_empty() => b.clone(),
            Some(b) => b.extended(&self.pd, &self.coarse.form, modes, &extra)?,
            None => MomentTable::new(&self.pd, &self.coarse.form, &grid.tx, &self.yh, &funcs)?,
        };
        let sys = table.assemble(funcs.len())?;
        let x = linalg::solve_checked(&sys.matrix, &sys.rhs, reduced::REDUCED_TOLERANCE)?;
        let u = reduced::prolongate(grid, &funcs, &x);
        estimator::delta_for(&self.coarse, &u)
    }
}

/// Hyperparameters of the adaptive training-set extension.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub qbar: usize,
    pub m_max: usize,
    pub i_max: usize,
    pub n_xi: usize,
    pub theta: f64,
    pub sigma_thres: f64,
    /// Cells per direction of the initial grid.
    pub initial_divisions: usize,
    pub seed: u64,
    pub strategy: MarkStrategy,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            qbar: 2,
            m_max: 10,
            i_max: 1,
            n_xi: 3,
            theta: 0.1,
            sigma_thres: 4.0,
            initial_divisions: 2,
            seed: 0,
            strategy: MarkStrategy::Smallest,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.qbar == 0 || self.n_xi == 0 || self.initial_divisions == 0 {
            return Err(Error::invalid("qbar, n_xi and initial_divisions must be positive"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::invalid(format!("theta = {} not in (0, 1]", self.theta)));
        }
        if self.sigma_thres.is_nan() {
            return Err(Error::invalid("sigma_thres is NaN"));
        }
        Ok(())
    }
}

/// Solves the snapshot problems of every sample that has none yet.
pub fn fill_snapshots<E: Executor>(exec: &E, ctx: &RbContext, grid: &mut TrainingGrid) -> Result<()> {
    let pending: Vec<(usize, usize)> = grid
        .cells
        .iter()
        .enumerate()
        .flat_map(|(c, cell)| {
            cell.samples
                .iter()
                .enumerate()
                .filter(|(_, s)| !s.solved)
                .map(move |(k, _)| (c, k))
        })
        .collect();
    let cells = &grid.cells;
    let results = exec.map(pending.len(), |j| {
        let (c, k) = pending[j];
        ctx.snapshots_at(&cells[c].samples[k].mu)
    });
    for ((c, k), r) in pending.into_iter().zip(results) {
        let s = &mut grid.cells[c].samples[k];
        s.snapshots = r?;
        s.solved = true;
    }
    Ok(())
}

/// `η(g) = min Δ_m(μ)` over the samples of each listed cell and
/// `σ(g) = diam(g) ρ(g)`.
pub fn element_indicators<E: Executor>(
    exec: &E,
    ctx: &RbContext,
    grid: &mut TrainingGrid,
    modes: &[Vec<f64>],
    cells: &[usize],
) -> Result<()> {
    let base = ctx.base_table(modes)?;
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .flat_map(|&c| (0..grid.cells[c].samples.len()).map(move |k| (c, k)))
        .collect();
    let all = &grid.cells;
    let results = exec.map(jobs.len(), |j| {
        let (c, k) = jobs[j];
        let s = &all[c].samples[k];
        if s.snapshots.is_empty() {
            return Ok(f64::INFINITY);
        }
        ctx.indicator(modes, base.as_ref(), &s.snapshots)
            .map_err(|e| Error::IndicatorFailure {
                cell: c,
                cause: e.to_string(),
            })
    });
    for ((c, k), r) in jobs.into_iter().zip(results) {
        grid.cells[c].samples[k].delta = r?;
    }
    for &c in cells {
        let cell = &mut grid.cells[c];
        cell.eta = cell.samples.iter().map(|s| s.delta).fold(f64::INFINITY, f64::min);
        cell.sigma = cell.diameter() * cell.rho as f64;
    }
    Ok(())
}

/// Result of the adaptive training-set extension.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub grid: TrainingGrid,
    pub snapshots: Vec<TransverseSnapshot>,
}

/// SOLVE → ESTIMATE → MARK → REFINE over `m = 1..m_max`, with a POD of
/// size `m` closing every outer step.
pub fn adaptive_train_extension<E: Executor>(
    exec: &E,
    ctx: &RbContext,
    cfg: &TrainingConfig,
) -> Result<TrainingOutcome> {
    cfg.validate()?;
    let mut grid = TrainingGrid::uniform(&ctx.th, cfg.qbar, cfg.initial_divisions, cfg.n_xi, cfg.seed)?;
    let mut modes: Vec<Vec<f64>> = Vec::new();
    fill_snapshots(exec, ctx, &mut grid)?;
    for m in 1..=cfg.m_max {
        fill_snapshots(exec, ctx, &mut grid)?;
        let all: Vec<usize> = (0..grid.len()).collect();
        element_indicators(exec, ctx, &mut grid, &modes, &all)?;
        for _ in 0..cfg.i_max {
            let eta: Vec<f64> = grid.cells.iter().map(|c| c.eta).collect();
            let sigma: Vec<f64> = grid.cells.iter().map(|c| c.sigma).collect();
            let marked = mark(&eta, &sigma, cfg.theta, cfg.sigma_thres, cfg.strategy);
            let fresh = grid.refine(&marked);
            fill_snapshots(exec, ctx, &mut grid)?;
            element_indicators(exec, ctx, &mut grid, &modes, &fresh)?;
        }
        let snaps: Vec<Vec<f64>> = grid.snapshots().into_iter().map(|s| s.values).collect();
        modes = pod(&ctx.yh, &snaps, PodTarget::Count(m))?.modes;
    }
    let snapshots = grid.snapshots();
    if snapshots.is_empty() {
        return Err(Error::EmptySnapshots);
    }
    Ok(TrainingOutcome { grid, snapshots })
}

/// Training followed by a final POD.
pub fn adaptive_hmr_rb<E: Executor>(
    exec: &E,
    ctx: &RbContext,
    cfg: &TrainingConfig,
    target: PodTarget,
) -> Result<(ReductionSpace, TrainingOutcome)> {
    let out = adaptive_train_extension(exec, ctx, cfg)?;
    let space = pod_snapshots(&ctx.yh, &out.snapshots, target)?;
    Ok((space, out))
}
