use std::path::Path;

use optomech_witness::optimizer::{Bracket, SearchSpace};
use optomech_witness::statistics::DEFAULT_CALIBRATION_RUNS;
use optomech_witness::{HardwareParams, SystemParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Verify,
    Sweep,
    Optimize,
    Feasibility,
    Simulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Laboratory parameters as quoted in frequency units: every rate is
/// `ω/2π` in Hz and is multiplied by 2π on conversion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HardwareBlock {
    pub g0_over_2pi_hz: f64,
    pub kappa_over_2pi_hz: f64,
    pub omega_m_over_2pi_hz: f64,
    pub n_plus: f64,
    pub n_minus: f64,
    pub t1_s: f64,
    pub t2_s: f64,
    pub n0: f64,
    pub eta: f64,
}

impl HardwareBlock {
    pub fn to_hardware(&self) -> HardwareParams {
        HardwareParams::from_frequencies(
            self.g0_over_2pi_hz,
            self.kappa_over_2pi_hz,
            self.omega_m_over_2pi_hz,
            self.n_plus,
            self.n_minus,
            self.t1_s,
            self.t2_s,
            self.n0,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grids {
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    pub eta: Vec<f64>,
    pub n0: Vec<f64>,
    /// Pair-creation probabilities, used by `verify` only.
    pub p: Vec<f64>,
    /// `(α, β)` pairs, used by `verify` only.
    pub displacements: Vec<(f64, f64)>,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            t: (1..=10).map(|i| i as f64 / 10.0).collect(),
            eta: vec![1.0],
            n0: vec![0.0],
            p: vec![0.1, 0.3],
            displacements: vec![(2.63, -2.63), (0.5, -1.0)],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub alpha: Bracket,
    pub beta: Bracket,
    /// Defaults to `(0, 0.5]` for `optimize` and `sweep`, and to the
    /// configured `p` for `feasibility` and `simulate`.
    pub p: Option<Bracket>,
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        let d = SearchSpace::default();
        Self {
            alpha: d.alpha,
            beta: d.beta,
            p: None,
            ftol: d.ftol,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatisticsConfig {
    pub significance: f64,
    pub calibration_runs: f64,
    pub seed: Option<u64>,
    pub replications: u64,
}

impl Default for StatisticsConfig {
    fn default() -> Self {
        Self {
            significance: 3.0,
            calibration_runs: DEFAULT_CALIBRATION_RUNS,
            seed: None,
            replications: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub system: Option<SystemParams>,
    pub hardware: Option<HardwareBlock>,
    pub grids: Grids,
    pub optimizer: OptimizerConfig,
    pub statistics: StatisticsConfig,
    pub output: OutputConfig,
    /// Fixed oracle cutoff for `verify`; adaptive when absent.
    pub cutoff: Option<usize>,
    pub threads: Option<usize>,
}

/// System parameters resolved from whichever block was supplied.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedParams {
    pub system: SystemParams,
    pub hardware: Option<HardwareParams>,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn command(&self) -> Result<Command> {
        self.command
            .ok_or_else(|| CliError::Config("no command given".into()))
    }

    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(match self.command {
            Some(Command::Sweep) => Format::Csv,
            _ => Format::Json,
        })
    }

    /// Exactly one of `system` and `hardware`.
    pub fn params(&self) -> Result<ResolvedParams> {
        match (&self.system, &self.hardware) {
            (Some(_), Some(_)) => Err(CliError::Config(
                "give either a system or a hardware block, not both".into(),
            )),
            (None, None) => Err(CliError::Config(
                "a system or hardware block is required".into(),
            )),
            (Some(sp), None) => {
                sp.validate().map_err(|e| CliError::Config(e.to_string()))?;
                Ok(ResolvedParams {
                    system: *sp,
                    hardware: None,
                    warnings: Vec::new(),
                })
            }
            (None, Some(hw)) => {
                let params = hw.to_hardware();
                let system = params
                    .to_system_params(hw.eta)
                    .map_err(|e| CliError::Config(e.to_string()))?;
                Ok(ResolvedParams {
                    system,
                    warnings: params.warnings(),
                    hardware: Some(params),
                })
            }
        }
    }

    pub fn search_space(&self, default_p: Bracket) -> SearchSpace {
        SearchSpace {
            alpha: self.optimizer.alpha,
            beta: self.optimizer.beta,
            p: self.optimizer.p.unwrap_or(default_p),
            ftol: self.optimizer.ftol,
            max_iter: self.optimizer.max_iter,
        }
    }

    pub fn check_basic(&self) -> Result<()> {
        if let Some(0) = self.threads {
            return Err(CliError::Config("threads must be >= 1".into()));
        }
        if self.system.is_some() && self.hardware.is_some() {
            return Err(CliError::Config(
                "give either a system or a hardware block, not both".into(),
            ));
        }
        Ok(())
    }
}
