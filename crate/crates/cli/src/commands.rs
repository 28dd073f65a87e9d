use num_complex::Complex64;
use optomech_witness::analytic::probability_set;
use optomech_witness::optimizer::{optimize_setting, sweep_t, Bracket, OptimizationResult, SearchSpace, SweepRow};
use optomech_witness::fock::{oracle_probability_set, simulate_protocol, Cutoff};
use optomech_witness::statistics::{calibrated_setup, required_runs_for, simulate_replications, RunPlan};
use optomech_witness::{ClickProbabilitySet, Error as CoreError, SystemParams};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig};
use crate::error::{CliError, Result};


pub const VERIFY_TOLERANCE: f64 = 1e-8;
pub const RNG_NAME: &str = "ChaCha20";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyPoint {
    pub p: f64,
    #[serde(rename = "T")]
    pub t: f64,
    pub eta: f64,
    pub n0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub cutoff: usize,
    pub max_abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feasibility {
    pub system: SystemParams,
    pub hardware_warnings: Vec<String>,
    pub setting: OptimizationResult,
    pub significance: f64,
    pub calibration_runs: f64,
    pub n_total: u64,
    pub plan: RunPlan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub replications: u64,
    pub mean: f64,
    pub std: f64,
    pub positive_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CommandResult {
    Verify {
        tolerance: f64,
        max_abs_diff: f64,
        passed: bool,
        points: Vec<VerifyPoint>,
    },
    Sweep {
        rows: Vec<SweepRow>,
    },
    Optimize {
        system: SystemParams,
        hardware_warnings: Vec<String>,
        result: OptimizationResult,
    },
    Feasibility(Feasibility),
    Simulate {
        feasibility: Feasibility,
        seed: u64,
        rng: String,
        summary: SimulationSummary,
        values: Vec<f64>,
    },
}

/// The effective configuration together with its result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: RunConfig,
    pub result: CommandResult,
}

pub fn run(config: &RunConfig) -> Result<CommandResult> {
    config.check_basic()?;
    match config.command()? {
        Command::Verify => verify(config),
        Command::Sweep => sweep(config),
        Command::Optimize => optimize(config),
        Command::Feasibility => feasibility(config).map(CommandResult::Feasibility),
        Command::Simulate => simulate(config),
    }
}

fn non_empty(name: &str, len: usize) -> Result<()> {
    if len == 0 {
        return Err(CliError::Config(format!("grid {name} is empty")));
    }
    Ok(())
}

fn max_discrepancy(a: &ClickProbabilitySet, b: &ClickProbabilitySet) -> f64 {
    let flat = |s: &ClickProbabilitySet| {
        [s.p_pp, s.p_pm, s.p_mp, s.p_mm, s.pc_a1, s.pc_a2, s.q_singles_a, s.q_singles_b, s.q_joint]
    };
    flat(a)
        .iter()
        .zip(flat(b))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn verify_point(sp: &SystemParams, alpha: f64, beta: f64, cutoff: Option<usize>) -> Result<VerifyPoint> {
    let here = format!(
        "p={}, T={}, eta={}, n0={}, alpha={alpha}, beta={beta}",
        sp.p, sp.t, sp.eta, sp.n0
    );
    let locate = |e: CoreError| match e {
        CoreError::UnderTruncation { cutoff, tail, context } => CoreError::UnderTruncation {
            cutoff,
            tail,
            context: format!("{context}; at {here}"),
        },
        other => other,
    };
    let (a, b) = (Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0));
    let policy = match cutoff {
        Some(c) => Cutoff::Fixed(c),
        None => Cutoff::Adaptive {
            probe: sp.eta.sqrt() * alpha.abs().max(beta.abs()),
        },
    };
    let state = simulate_protocol(sp, policy).map_err(locate)?;
    let oracle = oracle_probability_set(&state, a, b, sp.eta).map_err(locate)?;
    let closed = probability_set(sp, a, b)?;
    Ok(VerifyPoint {
        p: sp.p,
        t: sp.t,
        eta: sp.eta,
        n0: sp.n0,
        alpha,
        beta,
        cutoff: state.cutoff(),
        max_abs_diff: max_discrepancy(&oracle, &closed),
    })
}

fn verify(config: &RunConfig) -> Result<CommandResult> {
    let g = &config.grids;
    non_empty("p", g.p.len())?;
    non_empty("T", g.t.len())?;
    non_empty("eta", g.eta.len())?;
    non_empty("n0", g.n0.len())?;
    non_empty("displacements", g.displacements.len())?;
    let mut params = Vec::new();
    for &p in &g.p {
        for &t in &g.t {
            for &eta in &g.eta {
                for &n0 in &g.n0 {
                    let sp = SystemParams::new(p, t, eta, n0)
                        .map_err(|e| CliError::Config(format!("grid point: {e}")))?;
                    params.extend(g.displacements.iter().map(|&(a, b)| (sp, a, b)));
                }
            }
        }
    }
    let points = params
        .par_iter()
        .map(|(sp, a, b)| verify_point(sp, *a, *b, config.cutoff))
        .collect::<Result<Vec<_>>>()?;
    let max_abs_diff = points.iter().map(|p| p.max_abs_diff).fold(0.0, f64::max);
    Ok(CommandResult::Verify {
        tolerance: VERIFY_TOLERANCE,
        max_abs_diff,
        passed: max_abs_diff < VERIFY_TOLERANCE,
        points,
    })
}

fn sweep(config: &RunConfig) -> Result<CommandResult> {
    let g = &config.grids;
    non_empty("T", g.t.len())?;
    non_empty("eta", g.eta.len())?;
    non_empty("n0", g.n0.len())?;
    let space = config.search_space(SearchSpace::default().p);
    let mut rows = Vec::new();
    for &n0 in &g.n0 {
        rows.extend(sweep_t(&g.eta, n0, &g.t, &space)?);
    }
    Ok(CommandResult::Sweep { rows })
}

fn optimize(config: &RunConfig) -> Result<CommandResult> {
    let resolved = config.params()?;
    let sp = resolved.system;
    let space = config.search_space(SearchSpace::default().p);
    let result = optimize_setting(sp.t, sp.eta, sp.n0, &space)?;
    Ok(CommandResult::Optimize {
        system: sp,
        hardware_warnings: resolved.warnings,
        result,
    })
}

fn feasibility(config: &RunConfig) -> Result<Feasibility> {
    let resolved = config.params()?;
    let sp = resolved.system;
    let stats = &config.statistics;
    if !(stats.significance > 0.0) {
        return Err(CliError::Config("significance must be > 0".into()));
    }
    if !(stats.calibration_runs >= 1.0) {
        return Err(CliError::Config("calibration_runs must be >= 1".into()));
    }
    let space = config.search_space(Bracket::Fixed(sp.p));
    let setting = optimize_setting(sp.t, sp.eta, sp.n0, &space)?;
    let at = SystemParams::new(setting.p, sp.t, sp.eta, sp.n0)?;
    let (functional, probs, diff) = calibrated_setup(&at, setting.alpha, setting.beta, stats.calibration_runs)?;
    if !(diff > 0.0) {
        return Err(CoreError::NoViolation { diff }.into());
    }
    let plan = required_runs_for(&functional, &probs, stats.significance)?;
    Ok(Feasibility {
        system: at,
        hardware_warnings: resolved.warnings,
        setting,
        significance: stats.significance,
        calibration_runs: stats.calibration_runs,
        n_total: plan.total,
        plan,
    })
}

fn simulate(config: &RunConfig) -> Result<CommandResult> {
    let seed = config
        .statistics
        .seed
        .ok_or_else(|| CliError::Config("simulate needs a seed".into()))?;
    let reps = config.statistics.replications;
    if reps == 0 {
        return Err(CliError::Config("replications must be >= 1".into()));
    }
    let feasibility = feasibility(config)?;
    let values = simulate_replications(&feasibility.plan, seed, reps)?;
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    let positive_fraction = values.iter().filter(|v| **v > 0.0).count() as f64 / n;
    Ok(CommandResult::Simulate {
        feasibility,
        seed,
        rng: RNG_NAME.to_owned(),
        summary: SimulationSummary {
            replications: reps,
            mean,
            std,
            positive_fraction,
        },
        values,
    })
}
