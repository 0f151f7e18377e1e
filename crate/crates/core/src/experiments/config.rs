use serde::{Deserialize, Serialize};

use crate::generators::SystemParams;
use crate::solvers::{Direction, MethodKind, Variant, DEFAULT_EPS, DEFAULT_INNER_EPS};

use super::StudyError;

/// One parameter combination of a study grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub n: usize,
    pub d_base: f64,
    pub nu_d: f64,
    pub nu_s: f64,
    pub lambda: f64,
}

impl Setting {
    pub fn params(&self, seed: u64) -> SystemParams {
        SystemParams {
            n: self.n,
            d_base: self.d_base,
            nu_d: self.nu_d,
            nu_s: self.nu_s,
            lambda: self.lambda,
            seed,
        }
    }
}

/// Cartesian product of the generator axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub n_list: Vec<usize>,
    pub d_base_list: Vec<f64>,
    pub nu_d_list: Vec<f64>,
    pub nu_s_list: Vec<f64>,
    pub lambda_list: Vec<f64>,
}

impl Grid {
    /// Settings in row-major order over `n, d_base, nu_d, nu_s, lambda`.
    pub fn settings(&self) -> Vec<Setting> {
        let mut out = Vec::new();
        for &n in &self.n_list {
            for &d_base in &self.d_base_list {
                for &nu_d in &self.nu_d_list {
                    for &nu_s in &self.nu_s_list {
                        for &lambda in &self.lambda_list {
                            out.push(Setting {
                                n,
                                d_base,
                                nu_d,
                                nu_s,
                                lambda,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    fn validate(&self) -> Result<(), StudyError> {
        let axes = [
            ("n_list", self.n_list.is_empty()),
            ("d_base_list", self.d_base_list.is_empty()),
            ("nu_d_list", self.nu_d_list.is_empty()),
            ("nu_s_list", self.nu_s_list.is_empty()),
            ("lambda_list", self.lambda_list.is_empty()),
        ];
        if let Some((name, _)) = axes.iter().find(|(_, empty)| *empty) {
            return Err(StudyError::InvalidConfig(format!("{name} is empty")));
        }
        for s in self.settings() {
            s.params(0)
                .validate()
                .map_err(|e| StudyError::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }
}

fn default_direction() -> Direction {
    Direction::Decreasing
}

fn default_inner_eps() -> f64 {
    DEFAULT_INNER_EPS
}

fn default_eps() -> f64 {
    DEFAULT_EPS
}

fn default_variants() -> Vec<String> {
    Variant::runtime_set().iter().map(|v| v.label()).collect()
}

/// First-candidate error rates of Trial-and-Error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorRateConfig {
    #[serde(flatten)]
    pub grid: Grid,
    pub lag_list: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub methods: Vec<MethodKind>,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    /// Inner tolerance of the increasing Hybrid debt step.
    #[serde(default = "default_inner_eps")]
    pub inner_eps: f64,
}

impl ErrorRateConfig {
    /// The lag study grid: `d = 1.5`, three debt and equity integration
    /// levels, three structures, lags 2–7.
    pub fn standard_grid(n_list: Vec<usize>, repetitions: usize, seed: u64) -> Self {
        ErrorRateConfig {
            grid: Grid {
                n_list,
                d_base_list: vec![1.5],
                nu_d_list: vec![0.9, 0.5, 0.1],
                nu_s_list: vec![0.45, 0.25, 0.05],
                lambda_list: vec![0.0, 0.5, 1.0],
            },
            lag_list: (2..=7).collect(),
            repetitions,
            seed,
            methods: MethodKind::ALL.to_vec(),
            direction: Direction::Decreasing,
            inner_eps: DEFAULT_INNER_EPS,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| StudyError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        self.grid.validate()?;
        if self.repetitions == 0 {
            return Err(StudyError::InvalidConfig("repetitions must be at least 1".into()));
        }
        if self.lag_list.is_empty() || self.lag_list.iter().any(|&l| l < 2) {
            return Err(StudyError::InvalidConfig("lag_list must be nonempty with every lag ≥ 2".into()));
        }
        if self.methods.is_empty() {
            return Err(StudyError::InvalidConfig("methods is empty".into()));
        }
        if !matches!(self.direction, Direction::Decreasing | Direction::Increasing) {
            return Err(StudyError::InvalidConfig("direction must be increasing or decreasing".into()));
        }
        if !(self.inner_eps > 0.0) {
            return Err(StudyError::InvalidConfig("inner_eps must be positive".into()));
        }
        Ok(())
    }
}

/// Runtime comparison across algorithm variants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuntimeConfig {
    #[serde(flatten)]
    pub grid: Grid,
    pub repetitions: usize,
    pub seed: u64,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Variant labels such as `DP`, `ITE`, `SH`.
    #[serde(default = "default_variants")]
    pub variants: Vec<String>,
    /// Trial-and-Error lag; the method default when absent.
    #[serde(default)]
    pub lag: Option<usize>,
}

impl RuntimeConfig {
    /// The runtime grid: five debt levels, seven equity and seven debt
    /// integration levels, complete structure (`λ = 0`), `eps = 1e-3`, all fifteen variants.
    pub fn standard_grid(n_list: Vec<usize>, repetitions: usize, seed: u64) -> Self {
        RuntimeConfig {
            grid: Grid {
                n_list,
                d_base_list: vec![1.0, 1.5, 2.0, 2.5, 3.0],
                nu_d_list: vec![0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95],
                nu_s_list: vec![0.025, 0.1, 0.175, 0.25, 0.325, 0.4, 0.475],
                lambda_list: vec![0.0],
            },
            repetitions,
            seed,
            eps: DEFAULT_EPS,
            variants: default_variants(),
            lag: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, StudyError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| StudyError::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parsed_variants(&self) -> Result<Vec<Variant>, StudyError> {
        self.variants
            .iter()
            .map(|label| {
                Variant::from_label(label)
                    .ok_or_else(|| StudyError::InvalidConfig(format!("unknown algorithm variant `{label}`")))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<(), StudyError> {
        self.grid.validate()?;
        if self.repetitions == 0 {
            return Err(StudyError::InvalidConfig("repetitions must be at least 1".into()));
        }
        if !(self.eps > 0.0) {
            return Err(StudyError::InvalidConfig("eps must be positive".into()));
        }
        if self.variants.is_empty() {
            return Err(StudyError::InvalidConfig("variants is empty".into()));
        }
        if matches!(self.lag, Some(l) if l < 2) {
            return Err(StudyError::InvalidConfig("lag must be at least 2".into()));
        }
        self.parsed_variants().map(|_| ())
    }
}
