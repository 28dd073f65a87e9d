use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::linear::{calibrated_estimator, CalibrationConstants, LinearFunctional, DEFAULT_CALIBRATION_RUNS, MEASURED};
use crate::analytic::probability_set;
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::witness::{evaluate_set, DisplacementSetting};

/// Upper limit of the run-count search.
pub const MAX_RUNS: u64 = 1 << 52;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub counts: [u64; MEASURED],
    pub total: u64,
    pub variance: f64,
    pub mean: f64,
    /// `mean / √variance`; infinite when the variance vanishes.
    pub significance: f64,
    pub functional: LinearFunctional<f64>,
    pub probabilities: [f64; MEASURED],
}

/// Splits `total` runs as `Nᵢ ∝ |cᵢ|√(Pᵢ(1−Pᵢ))`, the minimizer of
/// `Σ cᵢ² Pᵢ(1−Pᵢ)/Nᵢ` at fixed `Σ Nᵢ`. Rounding uses largest remainders;
/// every nonzero coefficient gets at least one run.
pub fn plan_runs(functional: &LinearFunctional<f64>, probs: &[f64; MEASURED], total: u64) -> Result<RunPlan> {
    let active: Vec<usize> = (0..MEASURED)
        .filter(|&i| functional.coefficients[i] != 0.0)
        .collect();
    if active.is_empty() {
        return Err(Error::Degenerate("all coefficients are zero".into()));
    }
    if total < active.len() as u64 {
        return Err(Error::invalid(format!(
            "{total} runs cannot cover {} estimated probabilities",
            active.len()
        )));
    }
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::invalid(format!("probability {p} outside [0, 1]")));
    }

    let mut weight: Vec<f64> = active
        .iter()
        .map(|&i| functional.coefficients[i].abs() * (probs[i] * (1.0 - probs[i])).sqrt())
        .collect();
    let sum: f64 = weight.iter().sum();
    if sum == 0.0 {
        // Every estimate is exact; spread evenly.
        weight.iter_mut().for_each(|w| *w = 1.0);
    }
    let sum: f64 = weight.iter().sum();
    let ideal: Vec<f64> = weight.iter().map(|w| total as f64 * w / sum).collect();
    let mut alloc: Vec<u64> = ideal.iter().map(|v| (v.floor() as u64).max(1)).collect();
    let remainder = |k: usize, alloc: &[u64]| ideal[k] - alloc[k] as f64;

    let mut assigned: u64 = alloc.iter().sum();
    while assigned < total {
        let k = (0..alloc.len())
            .max_by(|&a, &b| remainder(a, &alloc).total_cmp(&remainder(b, &alloc)).then(b.cmp(&a)))
            .expect("non-empty");
        alloc[k] += 1;
        assigned += 1;
    }
    while assigned > total {
        let k = (0..alloc.len())
            .filter(|&k| alloc[k] > 1)
            .min_by(|&a, &b| remainder(a, &alloc).total_cmp(&remainder(b, &alloc)).then(a.cmp(&b)))
            .expect("total covers one run per term");
        alloc[k] -= 1;
        assigned -= 1;
    }

    let mut counts = [0u64; MEASURED];
    for (&i, &n) in active.iter().zip(&alloc) {
        counts[i] = n;
    }
    finish(functional, probs, counts)
}

/// Plan for explicitly given counts.
pub fn plan_with_counts(
    functional: &LinearFunctional<f64>,
    probs: &[f64; MEASURED],
    counts: [u64; MEASURED],
) -> Result<RunPlan> {
    for (i, (&c, &n)) in functional.coefficients.iter().zip(&counts).enumerate() {
        if c != 0.0 && n == 0 {
            return Err(Error::invalid(format!("probability {i} has a coefficient but no runs")));
        }
    }
    finish(functional, probs, counts)
}

fn finish(functional: &LinearFunctional<f64>, probs: &[f64; MEASURED], counts: [u64; MEASURED]) -> Result<RunPlan> {
    let variance = functional.variance(probs, &counts)?;
    let mean = functional.apply(probs);
    let significance = if variance > 0.0 {
        mean / variance.sqrt()
    } else if mean > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    Ok(RunPlan {
        counts,
        total: counts.iter().sum(),
        variance,
        mean,
        significance,
        functional: *functional,
        probabilities: *probs,
    })
}

/// Estimator functional and asymptotic probabilities at `(α, β)`, with the
/// calibration taken from the same (exact) statistics. Vanishing
/// calibration probabilities are floored at `1/(2·calibration_runs)`.
pub fn calibrated_setup(
    params: &SystemParams<f64>,
    alpha: f64,
    beta: f64,
    calibration_runs: f64,
) -> Result<(LinearFunctional<f64>, [f64; MEASURED], f64)> {
    let (a, b) = (Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0));
    let probs = probability_set(params, a, b)?;
    let setting = DisplacementSetting::from_amplitudes(a, b, params.eta)?;
    let diff = evaluate_set(&probs, setting)?.diff;
    let k = match CalibrationConstants::from_probs(&probs) {
        Ok(k) => k,
        Err(Error::CalibrationDegenerate(_)) => CalibrationConstants::regularized(&probs, calibration_runs)?,
        Err(e) => return Err(e),
    };
    let functional = calibrated_estimator(&probs, &setting, &k)?;
    Ok((functional, probs.measured(), diff))
}

/// Smallest total for which the optimally allocated plan reaches
/// `mean ≥ significance·√variance`, found by doubling and bisection.
/// Calibration runs are not counted.
pub fn required_runs(params: &SystemParams<f64>, alpha: f64, beta: f64, significance: f64) -> Result<RunPlan> {
    if !(significance > 0.0 && significance.is_finite()) {
        return Err(Error::invalid(format!("significance {significance} must be > 0")));
    }
    let (functional, probs, diff) = calibrated_setup(params, alpha, beta, DEFAULT_CALIBRATION_RUNS)?;
    if !(diff > 0.0) {
        return Err(Error::NoViolation { diff });
    }
    required_runs_for(&functional, &probs, significance)
}

/// [`required_runs`] for a given functional and probabilities.
pub fn required_runs_for(
    functional: &LinearFunctional<f64>,
    probs: &[f64; MEASURED],
    significance: f64,
) -> Result<RunPlan> {
    let mean = functional.apply(probs);
    if !(mean > 0.0) {
        return Err(Error::NoViolation { diff: mean });
    }
    let active = functional.coefficients.iter().filter(|c| **c != 0.0).count() as u64;
    let enough = |n: u64| -> Result<Option<RunPlan>> {
        let plan = plan_runs(functional, probs, n)?;
        Ok((plan.significance >= significance).then_some(plan))
    };
    let mut lo = active.max(1);
    if let Some(plan) = enough(lo)? {
        return Ok(plan);
    }
    let mut hi = lo;
    let mut found = loop {
        hi = hi.checked_mul(2).filter(|&h| h <= MAX_RUNS).ok_or_else(|| {
            Error::Numerical(format!("more than {MAX_RUNS} runs needed"))
        })?;
        if let Some(plan) = enough(hi)? {
            break plan;
        }
        lo = hi;
    };
    // lo fails, hi passes.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        match enough(mid)? {
            Some(plan) => {
                hi = mid;
                found = plan;
            }
            None => lo = mid,
        }
    }
    Ok(found)
}
