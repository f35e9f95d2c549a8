//! End-to-end drivers behind the command line.

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rbhmr_core::cases::{self, TestCase};
use rbhmr_core::estimator::{self, ErrorReport};
use rbhmr_core::interface::{locate_interface, ExtremumMode, InterfaceCurve};
use rbhmr_core::problem::{FullSolution, ReferenceModel};
use rbhmr_core::rb::{adaptive_hmr_rb, Executor, PodTarget, RbContext, ReductionSpace, TrainingOutcome};
use rbhmr_core::reduced::ReducedSolution;
use rbhmr_core::{Partition1D, ScalarField, TensorGrid};

use crate::config::{ConfigError, RunConfig};
use crate::csv;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numerical failure: {0}")]
    Numerical(#[from] rbhmr_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    /// 2 for configuration and output problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

/// Everything produced by [`run_case`].
#[derive(Debug, Clone)]
pub struct CaseRun {
    pub reports: Vec<ErrorReport>,
    pub space: ReductionSpace,
    pub training: TrainingOutcome,
    pub reference: FullSolution,
    /// `p̃_m` at all grid nodes for the largest `m` of the sweep.
    pub solution: Vec<f64>,
    pub grid: TensorGrid,
}

pub fn test_case(cfg: &RunConfig) -> Result<TestCase, ConfigError> {
    cases::by_id(cfg.case, cfg.b).ok_or_else(|| ConfigError::Invalid(format!("unknown case {}", cfg.case)))
}

/// Reference solve, adaptive training, POD and the m-sweep.
pub fn run_case<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<CaseRun, RunError> {
    cfg.validate()?;
    let case = test_case(cfg)?;
    let (x0, x1) = case.pd.omega_x;
    let (y0, y1) = case.pd.omega_y;
    let grid = TensorGrid::uniform((x0, x1), (y0, y1), cfg.nh_x, cfg.nh_y)?;
    let ctx = RbContext::new(&case.pd, &case.lifting, cfg.mode, &grid, cfg.nh_coarse)?;
    let target = match cfg.eps_tol {
        Some(e) => PodTarget::Tolerance(e),
        None => PodTarget::Count(cfg.m_max),
    };
    let (space, training) = adaptive_hmr_rb(exec, &ctx, &cfg.training(), target)?;
    let model = ReferenceModel::new(&case.pd, &ctx.form, &grid)?;
    let reference = model.solve()?;
    let reports = estimator::m_sweep(&model, &reference, &space, cfg.m_max)?;
    let m = reports.len();
    let rsol = rbhmr_core::reduced::solve_reduced(
        &rbhmr_core::reduced::assemble_reduced(&case.pd, &ctx.form, &space.truncated(m), &grid.tx)?,
        &space,
        &grid,
    )?;
    let solution = lifted_values(&rsol, &ctx.form.lifting.value, &grid);
    Ok(CaseRun {
        reports,
        space,
        training,
        reference,
        solution,
        grid,
    })
}

fn lifted_values(rsol: &ReducedSolution, lifting: &ScalarField, grid: &TensorGrid) -> Vec<f64> {
    let ny = grid.ty.node_count();
    let mut v = rsol.nodal_values();
    for (i, &x) in grid.tx.nodes().iter().enumerate() {
        for (j, &y) in grid.ty.nodes().iter().enumerate() {
            v[i * ny + j] += lifting.eval(x, y);
        }
    }
    v
}

fn create(dir: &Path, name: &str) -> io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Writes `errors.csv`, `training.csv`, `snapshots.csv` and `solution.csv`.
pub fn write_case(run: &CaseRun, qbar: usize, dir: &Path) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = create(dir, "errors.csv")?;
    csv::write_reports(&mut w, &run.reports)?;
    w.flush()?;
    let mut w = create(dir, "training.csv")?;
    csv::write_training(&mut w, &run.training.grid)?;
    w.flush()?;
    let mut w = create(dir, "snapshots.csv")?;
    csv::write_snapshots(&mut w, qbar, &run.training.snapshots)?;
    w.flush()?;
    let mut w = create(dir, "solution.csv")?;
    csv::write_solution(&mut w, &run.grid, &run.solution)?;
    w.flush()
}

/// Data functions available to the detection study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataId {
    /// Source of case 1 without advection.
    Case1,
    /// Source of case 1 with `b = (100, 0)`.
    Case1Advective,
    Case2,
    Case3,
    /// `1` below `y = 0.5`, `0` above.
    Step,
}

impl FromStr for DataId {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "case1" => DataId::Case1,
            "case1-adv" => DataId::Case1Advective,
            "case2" => DataId::Case2,
            "case3" => DataId::Case3,
            "step" => DataId::Step,
            _ => {
                return Err(ConfigError::Value {
                    key: "data".into(),
                    value: s.into(),
                })
            }
        })
    }
}

impl DataId {
    pub fn field(self) -> (ScalarField, (f64, f64), (f64, f64)) {
        let src = |c: TestCase| (c.pd.source, c.pd.omega_x, c.pd.omega_y);
        match self {
            DataId::Case1 => src(cases::case1((0.0, 0.0))),
            DataId::Case1Advective => src(cases::case1((100.0, 0.0))),
            DataId::Case2 => src(cases::case2()),
            DataId::Case3 => src(cases::case3()),
            DataId::Step => (
                ScalarField::discontinuous(|_, y| if y < 0.5 { 1.0 } else { 0.0 }),
                (0.0, 2.0),
                (0.0, 1.0),
            ),
        }
    }
}

/// Locates the interface of a data function on an `nhp × nh` grid.
pub fn run_detect(data: DataId, nhp: usize, nh: usize, mode: ExtremumMode) -> Result<InterfaceCurve, RunError> {
    if nhp < 2 || nh < 4 {
        return Err(ConfigError::Invalid("detection needs NHp ≥ 2 and nh ≥ 4".into()).into());
    }
    let (f, ox, oy) = data.field();
    let cx = Partition1D::uniform(ox.0, ox.1, nhp)?;
    let fy = Partition1D::uniform(oy.0, oy.1, nh)?;
    Ok(locate_interface(&f, &cx, &fy, mode)?)
}

pub fn write_curve_file(curve: &InterfaceCurve, path: &Path) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    csv::write_curve(&mut w, curve)?;
    w.flush()
}
