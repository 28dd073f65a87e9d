use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use super::linear::MEASURED;
use super::plan::RunPlan;
use crate::analytic::probability_set;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Generator for replication `index` of base seed `seed`: ChaCha20 keyed by
/// the seed, with the replication index as stream number.
pub fn replication_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn sample(plan: &RunPlan, probs: &[f64; MEASURED], rng: &mut ChaCha20Rng) -> Result<f64> {
    let mut freq = [0.0; MEASURED];
    for i in 0..MEASURED {
        let n = plan.counts[i];
        if n == 0 {
            continue;
        }
        let dist = Binomial::new(n, probs[i])
            .map_err(|e| Error::invalid(format!("binomial({n}, {}): {e}", probs[i])))?;
        freq[i] = dist.sample(rng) as f64 / n as f64;
    }
    Ok(plan.functional.apply(&freq))
}

/// One simulated experiment: each probability is estimated from its own
/// binomial sample of `plan.counts[i]` runs, then the plan's functional is
/// applied to the frequencies.
pub fn simulate_from_plan(plan: &RunPlan, seed: u64) -> Result<f64> {
    sample(plan, &plan.probabilities, &mut replication_rng(seed, 0))
}

/// [`simulate_from_plan`] with the true probabilities taken from the closed
/// form at `params`, `(α, β)`.
pub fn simulate_experiment(
    params: &SystemParams<f64>,
    alpha: f64,
    beta: f64,
    plan: &RunPlan,
    seed: u64,
) -> Result<f64> {
    let probs = probability_set(params, Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))?.measured();
    sample(plan, &probs, &mut replication_rng(seed, 0))
}

/// `count` independent replications; replication `i` uses
/// [`replication_rng`]`(seed, i)`, so the output does not depend on
/// scheduling.
pub fn simulate_replications(plan: &RunPlan, seed: u64, count: u64) -> Result<Vec<f64>> {
    (0..count)
        .into_par_iter()
        .map(|i| sample(plan, &plan.probabilities, &mut replication_rng(seed, i)))
        .collect()
}
