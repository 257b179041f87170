//! Flat `key = value` run configuration shared by config files and flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use iht_core::{MisfitQuadrature, PdeKind, PenaltyKind, StepStrategy, StrategyKind};

pub const KNOWN_KEYS: &[&str] = &[
    "mesh-n", "alpha", "beta", "gamma", "bound", "no-bound", "penalty", "pde", "strategy", "lhat0",
    "theta", "eta", "imax", "lfixed", "max-iter", "tol", "out", "full", "seed", "ydzero", "misfit",
    "betas", "ns", "pareto",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Raw key/value pairs, later sources overriding earlier ones.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

fn normalize(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('_', "-").to_ascii_lowercase()
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), ConfigError> {
        let key = normalize(key);
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return err(format!("unknown configuration key '{key}'"));
        }
        self.entries.insert(key, value.into());
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected 'key = value'", lineno + 1));
            };
            raw.set(key, value.trim()).map_err(|e| ConfigError(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config file {}: {e}", path.display())))?;
        Self::parse_text(&text)
    }

    pub fn merge(&mut self, other: RawConfig) {
        self.entries.extend(other.entries);
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| ConfigError(format!("invalid value '{v}' for '{key}'"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool, ConfigError> {
        match self.get(key) {
            None => Ok(false),
            Some("true" | "1" | "yes" | "") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => err(format!("invalid boolean '{v}' for '{key}'")),
        }
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| {
                        s.trim()
                            .parse::<T>()
                            .map_err(|_| ConfigError(format!("invalid list entry '{s}' for '{key}'")))
                    })
                    .collect()
            })
            .transpose()
    }

    pub fn resolve(&self) -> Result<RunConfig, ConfigError> {
        let bound = match self.get("bound") {
            None => None,
            Some(v) if v.eq_ignore_ascii_case("inf") || v.eq_ignore_ascii_case("infinity") => Some(f64::INFINITY),
            Some(v) => Some(v.parse::<f64>().map_err(|_| ConfigError(format!("invalid bound '{v}'")))?),
        };
        let penalty = match self.get("penalty") {
            None => None,
            Some("l0") => Some(PenaltyKind::L0),
            Some("l1") => Some(PenaltyKind::L1),
            Some("switching") => Some(PenaltyKind::Switching),
            Some(v) => return err(format!("unknown penalty '{v}' (expected l0, l1, switching)")),
        };
        let pde = match self.get("pde") {
            None => None,
            Some("dirichlet") => Some(PdeKind::DirichletPoisson),
            Some("neumann") => Some(PdeKind::NeumannHelmholtz),
            Some(v) => return err(format!("unknown pde '{v}' (expected dirichlet, neumann)")),
        };
        let strategy = match self.get("strategy") {
            None => None,
            Some("fixed") => Some(StrategyKind::Fixed),
            Some("bt") => Some(StrategyKind::Bt),
            Some("btw") => Some(StrategyKind::BtW),
            Some("bt0") => Some(StrategyKind::Bt0),
            Some(v) => return err(format!("unknown strategy '{v}' (expected fixed, bt, btw, bt0)")),
        };
        let misfit = match self.get("misfit") {
            None | Some("interior") => MisfitQuadrature::InteriorRows,
            Some("consistent") => MisfitQuadrature::Consistent,
            Some(v) => return err(format!("unknown misfit '{v}' (expected interior, consistent)")),
        };
        let cfg = RunConfig {
            mesh_n: self.num("mesh-n")?,
            alpha: self.num("alpha")?,
            beta: self.num("beta")?,
            gamma: self.num("gamma")?,
            bound,
            no_bound: self.flag("no-bound")?,
            penalty,
            pde,
            strategy,
            lhat0: self.num("lhat0")?,
            theta: self.num("theta")?,
            eta: self.num("eta")?,
            imax: self.num("imax")?,
            lfixed: self.num("lfixed")?,
            max_iter: self.num("max-iter")?,
            tol: self.num("tol")?,
            out: self.get("out").map(PathBuf::from),
            full: self.flag("full")?,
            seed: self.num("seed")?.unwrap_or(0),
            ydzero: self.flag("ydzero")?,
            misfit,
            betas: self.list("betas")?,
            ns: self.list("ns")?,
            pareto: self.flag("pareto")?,
        };
        if cfg.no_bound && cfg.bound.is_some_and(f64::is_finite) {
            return err("'no-bound' conflicts with a finite 'bound'");
        }
        if cfg.mesh_n == Some(0) {
            return err("'mesh-n' must be positive");
        }
        Ok(cfg)
    }
}

/// Resolved configuration; `None` means the subcommand default.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mesh_n: Option<usize>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub bound: Option<f64>,
    pub no_bound: bool,
    pub penalty: Option<PenaltyKind>,
    pub pde: Option<PdeKind>,
    pub strategy: Option<StrategyKind>,
    pub lhat0: Option<f64>,
    pub theta: Option<f64>,
    pub eta: Option<f64>,
    pub imax: Option<usize>,
    pub lfixed: Option<f64>,
    pub max_iter: Option<usize>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub full: bool,
    pub seed: u64,
    pub ydzero: bool,
    pub misfit: MisfitQuadrature,
    pub betas: Option<Vec<f64>>,
    pub ns: Option<Vec<usize>>,
    pub pareto: bool,
}

impl RunConfig {
    /// Bound with `no-bound` applied, falling back to `default`.
    pub fn bound_or(&self, default: f64) -> f64 {
        if self.no_bound {
            f64::INFINITY
        } else {
            self.bound.unwrap_or(default)
        }
    }

    pub fn mesh_or(&self, coarse: usize, fine: usize) -> usize {
        self.mesh_n.unwrap_or(if self.full { fine } else { coarse })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("results"))
    }

    pub fn step_strategy(&self) -> StepStrategy {
        let d = StepStrategy::default();
        StepStrategy {
            kind: self.strategy.unwrap_or(d.kind),
            l_fixed: self.lfixed.unwrap_or(d.l_fixed),
            l_hat0: self.lhat0.unwrap_or(d.l_hat0),
            theta: self.theta.unwrap_or(d.theta),
            eta: self.eta.unwrap_or(d.eta),
            i_max: self.imax.unwrap_or(d.i_max),
        }
    }
}
