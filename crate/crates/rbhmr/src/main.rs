use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rbhmr::config::{read_pairs, ConfigError};
use rbhmr::run::{self, DataId, RunError};
use rbhmr::{RunConfig, Threads};
use rbhmr_core::interface::ExtremumMode;

/// RB-HMR for advection-diffusion problems with skewed interfaces.
#[derive(Parser, Debug)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Locate the interface of a data function and write it as CSV.
    Detect(DetectArgs),
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// `key = value` file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Test case 1, 2 or 3.
    #[arg(long)]
    case: Option<u8>,
    #[arg(long = "NH")]
    nh_x: Option<usize>,
    #[arg(long = "nh", global = true)]
    nh_y: Option<usize>,
    #[arg(long = "NHp", global = true)]
    nh_coarse: Option<usize>,
    #[arg(long)]
    qbar: Option<usize>,
    /// gD, lift, delta-h or riesz.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long = "m-max")]
    m_max: Option<usize>,
    #[arg(long = "i-max")]
    i_max: Option<usize>,
    #[arg(long = "n-xi")]
    n_xi: Option<usize>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long = "sigma-thres")]
    sigma_thres: Option<f64>,
    #[arg(long = "eps-tol")]
    eps_tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (file for `detect`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Advection of case 1.
    #[arg(long, allow_negative_numbers = true)]
    b1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b2: Option<f64>,
    #[arg(long = "initial-divisions")]
    initial_divisions: Option<usize>,
    /// smallest or largest.
    #[arg(long)]
    strategy: Option<String>,
}

#[derive(Args, Debug)]
struct DetectArgs {
    /// case1, case1-adv, case2, case3 or step.
    #[arg(long)]
    data: Option<String>,
    #[arg(long, value_enum, default_value_t = Extremum::Max)]
    extremum: Extremum,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Extremum {
    Max,
    Min,
    Both,
}

impl RunArgs {
    fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("case", self.case.map(|v| v.to_string()));
        put("NH", self.nh_x.map(|v| v.to_string()));
        put("nh", self.nh_y.map(|v| v.to_string()));
        put("NHp", self.nh_coarse.map(|v| v.to_string()));
        put("qbar", self.qbar.map(|v| v.to_string()));
        put("mode", self.mode.clone());
        put("m-max", self.m_max.map(|v| v.to_string()));
        put("i-max", self.i_max.map(|v| v.to_string()));
        put("n-xi", self.n_xi.map(|v| v.to_string()));
        put("theta", self.theta.map(|v| v.to_string()));
        put("sigma-thres", self.sigma_thres.map(|v| v.to_string()));
        put("eps-tol", self.eps_tol.map(|v| v.to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("b1", self.b1.map(|v| v.to_string()));
        put("b2", self.b2.map(|v| v.to_string()));
        put("initial-divisions", self.initial_divisions.map(|v| v.to_string()));
        put("strategy", self.strategy.clone());
        m
    }

    fn merged(&self) -> Result<(RunConfig, BTreeMap<String, String>), ConfigError> {
        let mut pairs = match &self.config {
            Some(p) => read_pairs(p)?,
            None => BTreeMap::new(),
        };
        pairs.extend(self.pairs());
        let mut cfg = RunConfig::default();
        cfg.apply(&pairs)?;
        Ok((cfg, pairs))
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    let (cfg, pairs) = cli.run.merged()?;
    match cli.command {
        None => {
            let out = run::run_case(&cfg, &Threads::available())?;
            run::write_case(&out, cfg.qbar, &cfg.out)?;
            for r in &out.reports {
                eprintln!(
                    "m = {:3}  err_V_rel = {:.3e}  delta_m = {:.3e}",
                    r.m, r.err_v_rel, r.delta_m
                );
            }
            Ok(())
        }
        Some(Command::Detect(d)) => {
            let data: DataId = d
                .data
                .as_deref()
                .or(pairs.get("data").map(String::as_str))
                .unwrap_or("case1")
                .parse()?;
            let mode = match d.extremum {
                Extremum::Max => ExtremumMode::Max,
                Extremum::Min => ExtremumMode::Min,
                Extremum::Both => ExtremumMode::Both,
            };
            let nhp = cli
                .run
                .nh_coarse
                .or(pairs.get("NHp").and_then(|v| v.parse().ok()))
                .unwrap_or(20);
            let nh = cli
                .run
                .nh_y
                .or(pairs.get("nh").and_then(|v| v.parse().ok()))
                .unwrap_or(100);
            let curve = run::run_detect(data, nhp, nh, mode)?;
            let path = if cfg.out.extension().is_some() {
                cfg.out.clone()
            } else {
                cfg.out.join("interface.csv")
            };
            run::write_curve_file(&curve, &path)?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
