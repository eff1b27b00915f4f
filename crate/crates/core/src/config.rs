//! Experiment configuration: a JSON document mirroring the model parameters
//! plus one experiment-kind section. All relative paths resolve against the
//! directory containing the config file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    Grid, MinorizationCertificate, ModelError, ModelParams, MutationKernel, Polynomial, RateSpec,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config invalid: {0}")]
    Invalid(String),
    #[error("config io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn invalid(field: &str, why: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid(format!("{field}: {why}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// omitted: six kernel standard deviations beyond the zero set of h,
    /// with 400 points
    #[serde(default)]
    pub grid: Option<GridConfig>,
    /// replicate / master seed; the CLI flag overrides it
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_kernel_tolerance")]
    pub kernel_tolerance: f64,
    pub experiment: ExperimentKind,
}

fn default_kernel_tolerance() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub rates: RatesConfig,
    pub gamma: f64,
    pub rho: f64,
    pub k: u64,
    pub kernel: KernelConfig,
    /// optional minorization certificate override (kappa0, eps)
    #[serde(default)]
    pub certificate: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RatesConfig {
    /// constant birth rate with polynomial death coefficients (low to high)
    BirthDeathPoly { b: f64, d: Vec<f64> },
    Constant { b: f64, d: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Gaussian { sigma: f64 },
    UniformWindow { eps: f64 },
    /// long-format CSV with columns x, y, density
    Tabulated { path: PathBuf },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentKind {
    Simulate {
        horizon: f64,
        mode: ModeConfig,
        #[serde(default = "default_one")]
        replicates: u64,
        #[serde(default)]
        init: InitConfig,
        /// lineages sampled at the final time for lineages.csv
        #[serde(default = "default_lineages")]
        lineages: usize,
        #[serde(default)]
        svg: bool,
    },
    Stationary {
        #[serde(default = "default_stationary_tol")]
        tol: f64,
    },
    Spine {
        direction: SpineDirection,
        n_paths: usize,
        horizon: f64,
        #[serde(default = "default_table_dt")]
        table_dt: f64,
        /// output sampling cadence for paths.csv
        #[serde(default = "default_path_dt")]
        output_dt: f64,
    },
    Validate {
        horizon: f64,
        replicates: u64,
        checkpoints: Vec<f64>,
        #[serde(default = "default_w1_tolerance")]
        tolerance_w1: f64,
        #[serde(default = "default_n_spine")]
        n_spine: usize,
        #[serde(default = "default_min_survivors")]
        min_survivors: usize,
    },
    Duality {
        #[serde(default = "default_pairs")]
        pairs: usize,
        #[serde(default = "default_one_f64")]
        time: f64,
        #[serde(default = "default_fk_dt")]
        dt: f64,
    },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeConfig {
    Nonlinear,
    /// competition frozen at the stationary eigenvalue (or an override)
    Frozen,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SpineDirection {
    Forward,
    Reversed,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitConfig {
    /// the stationary profile from the eigensolver
    #[default]
    Stationary,
    Gaussian { center: f64, sigma: f64, mass: f64 },
}

fn default_one() -> u64 {
    1
}
fn default_one_f64() -> f64 {
    1.0
}
fn default_lineages() -> usize {
    20
}
fn default_stationary_tol() -> f64 {
    1e-12
}
fn default_table_dt() -> f64 {
    1e-3
}
fn default_path_dt() -> f64 {
    0.05
}
fn default_w1_tolerance() -> f64 {
    0.1
}
fn default_n_spine() -> usize {
    4000
}
fn default_min_survivors() -> usize {
    50
}
fn default_pairs() -> usize {
    100
}
fn default_fk_dt() -> f64 {
    0.05
}

impl ExperimentConfig {
    pub fn from_path(path: &Path) -> Result<(Self, PathBuf), ConfigError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: ExperimentConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        let base = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok((cfg, base))
    }

    pub fn build_params(&self, base_dir: &Path) -> Result<ModelParams, ConfigError> {
        if self.model.k == 0 {
            return Err(invalid("model.k", "must be positive"));
        }
        if !self.model.gamma.is_finite() || self.model.gamma < 0.0 {
            return Err(invalid("model.gamma", "must be >= 0"));
        }
        let rates = match &self.model.rates {
            RatesConfig::BirthDeathPoly { b, d } => RateSpec::BirthDeathPoly {
                b: *b,
                d: Polynomial(d.clone()),
            },
            RatesConfig::Constant { b, d } => RateSpec::Constant { b: *b, d: *d },
        };
        let mut kernel = match &self.model.kernel {
            KernelConfig::Gaussian { sigma } => MutationKernel::gaussian(*sigma)
                .map_err(|e| invalid("model.kernel.sigma", e))?,
            KernelConfig::UniformWindow { eps } => MutationKernel::uniform_window(*eps)
                .map_err(|e| invalid("model.kernel.eps", e))?,
            KernelConfig::Tabulated { path } => {
                let full = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                load_tabulated_kernel(&full)?
            }
        };
        if let Some((kappa0, eps)) = self.model.certificate {
            if !(kappa0 > 0.0 && eps > 0.0) {
                return Err(invalid("model.certificate", "kappa0 and eps must be positive"));
            }
            kernel = kernel.with_certificate(MinorizationCertificate { kappa0, eps });
        }
        ModelParams::new(rates, self.model.gamma, self.model.rho, kernel, self.model.k)
            .map_err(|e| invalid("model", e))
    }

    pub fn build_grid(&self, params: &ModelParams) -> Result<Grid, ConfigError> {
        match &self.grid {
            Some(g) => Grid::new(g.x_min, g.x_max, g.n).map_err(|e| invalid("grid", e)),
            None => params.default_grid(400).map_err(|e| invalid("grid", e)),
        }
    }
}

/// Long-format kernel CSV: header `x,y,density`, one row per (x, y) pair on
/// a square grid.
pub fn load_tabulated_kernel(path: &Path) -> Result<MutationKernel, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    let field = "model.kernel.path";
    let mut rows: Vec<(f64, f64, f64)> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line.starts_with(|c: char| c.is_alphabetic())) {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = || -> Result<f64, ConfigError> {
            parts
                .next()
                .ok_or_else(|| invalid(field, format!("line {}: missing column", lineno + 1)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| invalid(field, format!("line {}: {e}", lineno + 1)))
        };
        rows.push((next()?, next()?, next()?));
    }
    if rows.is_empty() {
        return Err(invalid(field, "no data rows"));
    }
    let mut xs: Vec<f64> = rows.iter().map(|r| r.0).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let n = xs.len();
    if rows.len() != n * n {
        return Err(invalid(
            field,
            format!("expected {} rows for a {}x{} table, got {}", n * n, n, n, rows.len()),
        ));
    }
    let grid = Grid::new(xs[0], xs[n - 1], n).map_err(|e| invalid(field, e))?;
    let dx = grid.dx();
    let mut values = vec![0.0; n * n];
    let mut seen = vec![false; n * n];
    for (x, y, d) in rows {
        let i = ((x - grid.x_min) / dx).round() as usize;
        let j = ((y - grid.x_min) / dx).round() as usize;
        if i >= n || j >= n || (grid.x(i) - x).abs() > 1e-9 * dx.max(1.0) {
            return Err(invalid(field, format!("point ({x}, {y}) is off the grid")));
        }
        values[i * n + j] = d;
        seen[i * n + j] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(invalid(field, "table has missing (x, y) entries"));
    }
    Ok(MutationKernel::tabulated(grid, values)?)
}
