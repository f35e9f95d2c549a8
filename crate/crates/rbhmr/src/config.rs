//! Run configuration: defaults, `key = value` files and validation.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rbhmr_core::rb::{MarkStrategy, TrainingConfig};
use rbhmr_core::LiftingMode;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`")]
    Value { key: String, value: String },
    #[error("{0}")]
    Invalid(String),
}

/// All hyperparameters of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: u8,
    /// Elements in the dominant direction (`N_H`).
    pub nh_x: usize,
    /// Elements in the transverse direction (`n_h`).
    pub nh_y: usize,
    /// Dominant-direction elements of the indicator grid (`N_H'`).
    pub nh_coarse: usize,
    pub qbar: usize,
    pub mode: LiftingMode,
    pub m_max: usize,
    pub i_max: usize,
    pub n_xi: usize,
    pub theta: f64,
    pub sigma_thres: f64,
    /// POD tolerance; `None` keeps `m_max` modes.
    pub eps_tol: Option<f64>,
    pub seed: u64,
    pub out: PathBuf,
    /// Advection field of case 1.
    pub b: (f64, f64),
    pub initial_divisions: usize,
    pub strategy: MarkStrategy,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainingConfig::default();
        Self {
            case: 1,
            nh_x: 160,
            nh_y: 80,
            nh_coarse: 10,
            qbar: t.qbar,
            mode: LiftingMode::WeakLifting,
            m_max: t.m_max,
            i_max: t.i_max,
            n_xi: t.n_xi,
            theta: t.theta,
            sigma_thres: t.sigma_thres,
            eps_tol: None,
            seed: t.seed,
            out: PathBuf::from("out"),
            b: (0.0, 0.0),
            initial_divisions: t.initial_divisions,
            strategy: t.strategy,
        }
    }
}

/// Keys accepted in configuration files, spelled like the long flags.
pub const KEYS: [&str; 19] = [
    "case",
    "NH",
    "nh",
    "NHp",
    "qbar",
    "mode",
    "m-max",
    "i-max",
    "n-xi",
    "theta",
    "sigma-thres",
    "eps-tol",
    "seed",
    "out",
    "b1",
    "b2",
    "initial-divisions",
    "strategy",
    "data",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| ConfigError::Value {
        key: key.to_string(),
        value: value.to_string(),
    })
}

/// Reads `key = value` lines; `#` starts a comment and `_` may replace `-`.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: n + 1 })?;
        let key = k.trim().replace('_', "-");
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError::UnknownKey(key));
        }
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}

pub fn read_pairs(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pairs(&text)
}

impl RunConfig {
    /// Overrides fields from `key = value` pairs. Keys that do not belong to
    /// a case run (such as `data`) are ignored.
    pub fn apply(&mut self, pairs: &BTreeMap<String, String>) -> Result<(), ConfigError> {
        for (key, v) in pairs {
            let k = key.as_str();
            match k {
                "case" => self.case = parse(k, v)?,
                "NH" => self.nh_x = parse(k, v)?,
                "nh" => self.nh_y = parse(k, v)?,
                "NHp" => self.nh_coarse = parse(k, v)?,
                "qbar" => self.qbar = parse(k, v)?,
                "mode" => self.mode = parse(k, v)?,
                "m-max" => self.m_max = parse(k, v)?,
                "i-max" => self.i_max = parse(k, v)?,
                "n-xi" => self.n_xi = parse(k, v)?,
                "theta" => self.theta = parse(k, v)?,
                "sigma-thres" => self.sigma_thres = parse(k, v)?,
                "eps-tol" => {
                    self.eps_tol = match v.as_str() {
                        "" | "none" => None,
                        _ => Some(parse(k, v)?),
                    }
                }
                "seed" => self.seed = parse(k, v)?,
                "out" => self.out = PathBuf::from(v),
                "b1" => self.b.0 = parse(k, v)?,
                "b2" => self.b.1 = parse(k, v)?,
                "initial-divisions" => self.initial_divisions = parse(k, v)?,
                "strategy" => {
                    self.strategy = match v.as_str() {
                        "smallest" => MarkStrategy::Smallest,
                        "largest" => MarkStrategy::Largest,
                        _ => {
                            return Err(ConfigError::Value {
                                key: key.clone(),
                                value: v.clone(),
                            })
                        }
                    }
                }
                "data" => {}
                _ => return Err(ConfigError::UnknownKey(key.clone())),
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(1..=3).contains(&self.case) {
            return bad("case must be 1, 2 or 3");
        }
        if self.nh_x < 2 || self.nh_y < 2 || self.nh_coarse < 2 {
            return bad("NH, nh and NHp must be at least 2");
        }
        if self.qbar == 0 || self.m_max == 0 || self.n_xi == 0 || self.initial_divisions == 0 {
            return bad("qbar, m-max, n-xi and initial-divisions must be positive");
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return bad("theta must lie in (0, 1]");
        }
        if self.sigma_thres.is_nan() {
            return bad("sigma-thres must be a number");
        }
        if let Some(e) = self.eps_tol {
            if !(e > 0.0 && e < 1.0) {
                return bad("eps-tol must lie in (0, 1)");
            }
        }
        if !(self.b.0.is_finite() && self.b.1.is_finite()) {
            return bad("advection must be finite");
        }
        Ok(())
    }

    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            qbar: self.qbar,
            m_max: self.m_max,
            i_max: self.i_max,
            n_xi: self.n_xi,
            theta: self.theta,
            sigma_thres: self.sigma_thres,
            initial_divisions: self.initial_divisions,
            seed: self.seed,
            strategy: self.strategy,
        }
    }
}
