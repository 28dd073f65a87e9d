//! Maximization of `Q − S*` over real displacements and the pair-creation
//! probability, and the sweeps built from it.
//!
//! The search keeps `α ≥ 0` and `β ≤ 0`; the difference is even under a
//! joint sign flip, and opposite signs are the ones favored by the
//! correlation term.

mod nelder_mead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::witness::evaluate_real;

/// Smallest `p` the refinement may probe when the bracket is open at zero.
pub const P_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bracket {
    Fixed(f64),
    /// Closed interval `[lo, hi]` scanned with `points` grid values.
    Range { lo: f64, hi: f64, points: usize },
    /// Interval `(lo, hi]` scanned at `lo + (hi − lo)·k/points`, `k = 1..=points`.
    OpenLow { lo: f64, hi: f64, points: usize },
}

impl Bracket {
    fn validate(&self, name: &str) -> Result<()> {
        let ok = match *self {
            Bracket::Fixed(v) => v.is_finite(),
            Bracket::Range { lo, hi, points } => lo.is_finite() && hi.is_finite() && lo <= hi && points >= 1,
            Bracket::OpenLow { lo, hi, points } => lo.is_finite() && hi.is_finite() && lo < hi && points >= 1,
        };
        if !ok {
            return Err(Error::EmptyBracket(format!("{name}: {self:?}")));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        match *self {
            Bracket::Fixed(v) => vec![v],
            Bracket::Range { lo, hi, points: 1 } => vec![0.5 * (lo + hi)],
            Bracket::Range { lo, hi, points } => (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect(),
            Bracket::OpenLow { lo, hi, points } => (1..=points)
                .map(|k| lo + (hi - lo) * k as f64 / points as f64)
                .collect(),
        }
    }

    /// Bounds for the local search, or `None` when the coordinate is fixed.
    fn bounds(&self, floor: f64) -> Option<(f64, f64)> {
        match *self {
            Bracket::Fixed(_) => None,
            Bracket::Range { lo, hi, .. } => Some((lo, hi)),
            Bracket::OpenLow { lo, hi, .. } => Some((lo.max(floor).min(hi), hi)),
        }
    }

    fn spacing(&self) -> f64 {
        match *self {
            Bracket::Fixed(_) => 0.0,
            Bracket::Range { lo, hi, points } => (hi - lo) / (points.max(2) - 1) as f64,
            Bracket::OpenLow { lo, hi, points } => (hi - lo) / points as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub alpha: Bracket,
    pub beta: Bracket,
    pub p: Bracket,
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            alpha: Bracket::Range { lo: 0.0, hi: 6.0, points: 21 },
            beta: Bracket::Range { lo: -6.0, hi: 0.0, points: 21 },
            p: Bracket::OpenLow { lo: 0.0, hi: 0.5, points: 11 },
            ftol: 1e-7,
            max_iter: 200,
        }
    }
}

impl SearchSpace {
    /// Default brackets with `α` and `β` fixed.
    pub fn fixed_displacements(alpha: f64, beta: f64) -> Self {
        Self {
            alpha: Bracket::Fixed(alpha),
            beta: Bracket::Fixed(beta),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha.validate("alpha")?;
        self.beta.validate("beta")?;
        self.p.validate("p")?;
        let p_ok = |v: f64| (0.0..1.0).contains(&v);
        let p_in_range = match self.p {
            Bracket::Fixed(v) => p_ok(v),
            Bracket::Range { lo, hi, .. } => p_ok(lo) && p_ok(hi),
            Bracket::OpenLow { lo, hi, .. } => p_ok(lo) && p_ok(hi),
        };
        if !p_in_range {
            return Err(Error::EmptyBracket(format!("p bracket {:?} leaves [0, 1)", self.p)));
        }
        if !(self.ftol >= 0.0) || self.max_iter == 0 {
            return Err(Error::invalid("ftol must be >= 0 and max_iter >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    pub q: f64,
    pub s_star: f64,
    pub diff: f64,
    /// Best difference found on the coarse grid.
    pub grid_diff: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn objective(t: f64, eta: f64, n0: f64, alpha: f64, beta: f64, p: f64) -> Result<(f64, f64, f64)> {
    let params = SystemParams::new(p, t, eta, n0)?;
    let e = evaluate_real(&params, alpha, beta)?;
    if !e.diff.is_finite() {
        return Err(Error::NonFinite(format!(
            "T={t}, eta={eta}, n0={n0}, alpha={alpha}, beta={beta}, p={p}"
        )));
    }
    Ok((e.q, e.s_star, e.diff))
}

/// Grid scan followed by bounded Nelder–Mead refinement from the best grid
/// point. Deterministic for a given input.
pub fn optimize_setting(t: f64, eta: f64, n0: f64, space: &SearchSpace) -> Result<OptimizationResult> {
    space.validate()?;
    SystemParams::new(0.0, t, eta, n0)?;

    let (ga, gb, gp) = (space.alpha.grid(), space.beta.grid(), space.p.grid());
    let mut points = Vec::with_capacity(ga.len() * gb.len() * gp.len());
    for &a in &ga {
        for &b in &gb {
            points.extend(gp.iter().map(|&p| [a, b, p]));
        }
    }
    let values = points
        .par_iter()
        .map(|&[a, b, p]| objective(t, eta, n0, a, b, p).map(|v| v.2))
        .collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    let start = points[best];
    let grid_diff = values[best];

    let brackets = [space.alpha, space.beta, space.p];
    let free: Vec<usize> = (0..3).filter(|&i| brackets[i].bounds(P_FLOOR).is_some()).collect();
    let assemble = |y: &[f64]| {
        let mut full = start;
        for (k, &i) in free.iter().enumerate() {
            full[i] = y[k];
        }
        full
    };

    let (mut x, mut iterations, mut converged) = (start, 0, true);
    if !free.is_empty() {
        let bounds: Vec<(f64, f64)> = free
            .iter()
            .map(|&i| brackets[i].bounds(P_FLOOR).expect("free coordinate"))
            .collect();
        let lo: Vec<f64> = bounds.iter().map(|b| b.0).collect();
        let hi: Vec<f64> = bounds.iter().map(|b| b.1).collect();
        let y0: Vec<f64> = free.iter().map(|&i| start[i]).collect();
        let steps: Vec<f64> = free
            .iter()
            .map(|&i| 0.5 * brackets[i].spacing().max(1e-6))
            .collect();
        let m = nelder_mead::minimize(
            |y| {
                let [a, b, p] = assemble(y);
                objective(t, eta, n0, a, b, p).map(|v| -v.2)
            },
            &y0,
            &steps,
            &lo,
            &hi,
            nelder_mead::Options {
                ftol: space.ftol,
                max_iter: space.max_iter,
            },
        )?;
        if -m.f >= grid_diff {
            x = assemble(&m.x);
        }
        iterations = m.iterations;
        converged = m.converged;
    }

    let [alpha, beta, p] = x;
    let (q, s_star, diff) = objective(t, eta, n0, alpha, beta, p)?;
    Ok(OptimizationResult {
        alpha,
        beta,
        p,
        q,
        s_star,
        diff,
        grid_diff,
        iterations,
        converged,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "T")]
    pub t: f64,
    pub eta: f64,
    pub n0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    #[serde(rename = "S_star")]
    pub s_star: f64,
    pub diff: f64,
}

fn row(t: f64, eta: f64, n0: f64, space: &SearchSpace) -> Result<SweepRow> {
    let r = optimize_setting(t, eta, n0, space)?;
    Ok(SweepRow {
        t,
        eta,
        n0,
        alpha: r.alpha,
        beta: r.beta,
        p: r.p,
        q: r.q,
        s_star: r.s_star,
        diff: r.diff,
    })
}

fn non_empty(name: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::invalid(format!("{name} grid is empty")));
    }
    Ok(())
}

/// One optimized row per `(η, T)`, ordered by `η` then `T` as given.
pub fn sweep_t(etas: &[f64], n0: f64, ts: &[f64], space: &SearchSpace) -> Result<Vec<SweepRow>> {
    non_empty("eta", etas)?;
    non_empty("T", ts)?;
    let cells: Vec<(f64, f64)> = etas.iter().flat_map(|&e| ts.iter().map(move |&t| (e, t))).collect();
    cells.par_iter().map(|&(eta, t)| row(t, eta, n0, space)).collect()
}

/// One optimized row per `(n₀, T)`, ordered by `n₀` then `T` as given.
pub fn sweep_n0(eta: f64, n0s: &[f64], ts: &[f64], space: &SearchSpace) -> Result<Vec<SweepRow>> {
    non_empty("n0", n0s)?;
    non_empty("T", ts)?;
    let cells: Vec<(f64, f64)> = n0s.iter().flat_map(|&n| ts.iter().map(move |&t| (n, t))).collect();
    cells.par_iter().map(|&(n0, t)| row(t, eta, n0, space)).collect()
}
