//! Closed-form click and coincidence probabilities for the pulsed
//! two-mode protocol with thermal mechanical start, finite conversion and
//! finite detection efficiency.
//!
//! Outcome `+1` is "no click", `-1` is "click". Displacements are the
//! amplitudes set in front of the detectors; the efficiency `eta` enters
//! only through `eta·|α|²` style products.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::scalar::Scalar;

/// Negative rounding residue tolerated (and clamped to zero) in probabilities.
pub(crate) fn clamp_tolerance<S: Scalar>() -> S {
    S::lit(1e-12).max(S::epsilon() * S::lit(64.0))
}

fn clamp_probability<S: Scalar>(v: S, what: &str) -> Result<S> {
    if !v.is_finite() {
        return Err(Error::Numerical(format!("{what} is not finite")));
    }
    if v < -clamp_tolerance::<S>() || v > S::one() + clamp_tolerance::<S>() {
        return Err(Error::Inconsistent(format!("{what} = {v:?} outside [0, 1]")));
    }
    Ok(v.max(S::zero()).min(S::one()))
}

/// The seven measured quantities feeding the witness and its separable bound,
/// plus the displaced single-mode no-click probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClickProbabilitySet<S> {
    /// P(+1+1|0,0)
    pub p_pp: S,
    /// P(+1-1|0,0)
    pub p_pm: S,
    /// P(-1+1|0,0)
    pub p_mp: S,
    /// P(-1-1|0,0)
    pub p_mm: S,
    /// Twofold coincidence behind a 50/50 splitter on mode A₁.
    pub pc_a1: S,
    /// Twofold coincidence behind a 50/50 splitter on mode A₂.
    pub pc_a2: S,
    /// P(+1|α) on A₁.
    pub q_singles_a: S,
    /// P(+1|β) on A₂.
    pub q_singles_b: S,
    /// P(+1+1|α,β).
    pub q_joint: S,
}

impl<S: Scalar> ClickProbabilitySet<S> {
    /// Statistics of the two-mode vacuum at any displacement `(x, y)` seen
    /// by the detectors (effective amplitudes, already scaled by √η).
    pub fn vacuum(x: S, y: S) -> Self {
        let ex = (-x * x).exp();
        let ey = (-y * y).exp();
        Self {
            p_pp: S::one(),
            p_pm: S::zero(),
            p_mp: S::zero(),
            p_mm: S::zero(),
            pc_a1: S::zero(),
            pc_a2: S::zero(),
            q_singles_a: ex,
            q_singles_b: ey,
            q_joint: ex * ey,
        }
    }

    /// Every entry finite and inside [0, 1] up to 1e-10.
    pub fn validate_ranges(&self) -> Result<()> {
        let tol = S::lit(1e-10).max(S::epsilon() * S::lit(64.0));
        let entries = [
            ("p_pp", self.p_pp),
            ("p_pm", self.p_pm),
            ("p_mp", self.p_mp),
            ("p_mm", self.p_mm),
            ("pc_a1", self.pc_a1),
            ("pc_a2", self.pc_a2),
            ("q_singles_a", self.q_singles_a),
            ("q_singles_b", self.q_singles_b),
            ("q_joint", self.q_joint),
        ];
        for (name, v) in entries {
            if !v.is_finite() || v < -tol || v > S::one() + tol {
                return Err(Error::Inconsistent(format!("{name} = {v:?} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// Copy with every entry clamped into [0, 1]; removes the rounding
    /// residue admitted by [`Self::validate_ranges`].
    pub fn clamped(&self) -> Self {
        let c = |v: S| v.max(S::zero()).min(S::one());
        Self {
            p_pp: c(self.p_pp),
            p_pm: c(self.p_pm),
            p_mp: c(self.p_mp),
            p_mm: c(self.p_mm),
            pc_a1: c(self.pc_a1),
            pc_a2: c(self.pc_a2),
            q_singles_a: c(self.q_singles_a),
            q_singles_b: c(self.q_singles_b),
            q_joint: c(self.q_joint),
        }
    }

    /// Checks ranges, normalisation of the undisplaced joint outcomes, and
    /// that coincidences on A₁ are not more frequent than clicks on A₁.
    pub fn validate(&self) -> Result<()> {
        self.validate_ranges()?;
        let tol = S::lit(1e-10).max(S::epsilon() * S::lit(64.0));
        let total = self.p_pp + self.p_pm + self.p_mp + self.p_mm;
        if (total - S::one()).abs() > tol {
            return Err(Error::Inconsistent(format!(
                "undisplaced joint outcomes sum to {total:?}"
            )));
        }
        let click_a1 = S::one() - self.p_pp - self.p_pm;
        if self.pc_a1 > click_a1 + tol {
            return Err(Error::Inconsistent(format!(
                "coincidence {:?} exceeds click probability {:?} on A1",
                self.pc_a1, click_a1
            )));
        }
        let click_a2 = S::one() - self.p_pp - self.p_mp;
        if self.pc_a2 > click_a2 + tol {
            return Err(Error::Inconsistent(format!(
                "coincidence {:?} exceeds click probability {:?} on A2",
                self.pc_a2, click_a2
            )));
        }
        Ok(())
    }

    /// Displaced joint outcomes `[P(++), P(+-), P(-+), P(--)]` at (α, β),
    /// recovered by inclusion–exclusion from the singles and the joint.
    pub fn displaced_joint(&self) -> [S; 4] {
        let pp = self.q_joint;
        let pm = self.q_singles_a - self.q_joint;
        let mp = self.q_singles_b - self.q_joint;
        let mm = S::one() - self.q_singles_a - self.q_singles_b + self.q_joint;
        [pp, pm, mp, mm].map(|v| v.max(S::zero()))
    }

    /// The ten independently estimated probabilities, in the order of
    /// [`crate::statistics::Measured`].
    pub fn measured(&self) -> [S; 10] {
        let [dpp, dpm, dmp, dmm] = self.displaced_joint();
        [
            dpp, dpm, dmp, dmm, self.p_pp, self.p_pm, self.p_mp, self.p_mm, self.pc_a1, self.pc_a2,
        ]
    }

    pub fn cast<U: Scalar>(&self) -> ClickProbabilitySet<U> {
        let c = |v: S| U::lit(v.to_f64().unwrap_or(f64::NAN));
        ClickProbabilitySet {
            p_pp: c(self.p_pp),
            p_pm: c(self.p_pm),
            p_mp: c(self.p_mp),
            p_mm: c(self.p_mm),
            pc_a1: c(self.pc_a1),
            pc_a2: c(self.pc_a2),
            q_singles_a: c(self.q_singles_a),
            q_singles_b: c(self.q_singles_b),
            q_joint: c(self.q_joint),
        }
    }
}

/// P(+1+1|α,β): both detectors silent.
pub fn joint_click_prob<S: Scalar>(
    params: &SystemParams<S>,
    alpha: Complex<S>,
    beta: Complex<S>,
) -> Result<S> {
    params.validate()?;
    let SystemParams { p, t, eta, n0 } = *params;
    let one = S::one();
    let den = one + n0 * eta * t - p * (-one + eta + n0 * eta) * (-one + eta * t);
    let cross = S::lit(2.0) * (alpha * beta).re;
    let num = eta * alpha.norm_sqr() * (one + p * (-one + eta * t) + n0 * eta * t)
        + eta * beta.norm_sqr() * (one + p * (-one + eta + n0 * eta))
        + eta * eta * cross * (one + n0) * (p * t).sqrt();
    clamp_probability((one - p) / den * (-num / den).exp(), "P(+1+1|alpha,beta)")
}

/// P(+1|α) on mode A₁.
pub fn local_click_prob_a1<S: Scalar>(params: &SystemParams<S>, alpha: Complex<S>) -> Result<S> {
    params.validate()?;
    let SystemParams { p, eta, n0, .. } = *params;
    let one = S::one();
    let d = p * (eta + eta * n0 - one) + one;
    let v = (one - p) * (-eta * alpha.norm_sqr() * (one - p) / d).exp() / d;
    clamp_probability(v, "P(+1|alpha)")
}

/// P(+1|β) on mode A₂.
pub fn local_click_prob_a2<S: Scalar>(params: &SystemParams<S>, beta: Complex<S>) -> Result<S> {
    params.validate()?;
    let SystemParams { p, t, eta, n0 } = *params;
    let one = S::one();
    let d = eta * t * (n0 + p) - p + one;
    let v = (one - p) * (-eta * beta.norm_sqr() * (one - p) / d).exp() / d;
    clamp_probability(v, "P(+1|beta)")
}

/// Coincidence probabilities `(P_c(A₁), P_c(A₂))` behind 50/50 splitters.
pub fn coincidence_probs<S: Scalar>(params: &SystemParams<S>) -> Result<(S, S)> {
    params.validate()?;
    let SystemParams { p, t, eta, n0 } = *params;
    let (one, two) = (S::one(), S::lit(2.0));
    let pc1 = one
        - (one - p) / (one - p * (one - eta - n0 * eta))
        - two
            * ((one + n0) * (one - p) * eta * p
                / ((two - p * (two - eta - eta * n0)) * (one + p * (-one + eta + n0 * eta))));
    let pc2 = one
        - (one - p) / (one - p + (n0 + p) * t * eta)
        - two
            * ((one - p) * (n0 + p) * t * eta
                / ((two + n0 * t * eta + p * (-two + t * eta))
                    * (one + n0 * t * eta + p * (-one + t * eta))));
    Ok((
        clamp_probability(pc1, "P_c(A1)")?,
        clamp_probability(pc2, "P_c(A2)")?,
    ))
}

/// Undisplaced joint outcomes `[P(++), P(+-), P(-+), P(--)]` at α = β = 0.
pub fn no_displacement_joint_probs<S: Scalar>(params: &SystemParams<S>) -> Result<[S; 4]> {
    let zero = Complex::new(S::zero(), S::zero());
    let pp = joint_click_prob(params, zero, zero)?;
    let a = local_click_prob_a1(params, zero)?;
    let b = local_click_prob_a2(params, zero)?;
    inclusion_exclusion(a, b, pp)
}

/// Splits singles `a = P(+·)`, `b = P(·+)` and joint `pp = P(++)` into the
/// four joint outcomes.
pub fn inclusion_exclusion<S: Scalar>(a: S, b: S, pp: S) -> Result<[S; 4]> {
    let one = S::one();
    Ok([
        clamp_probability(pp, "P(++)")?,
        clamp_probability(a - pp, "P(+-)")?,
        clamp_probability(b - pp, "P(-+)")?,
        clamp_probability(one - a - b + pp, "P(--)")?,
    ])
}

/// All quantities recorded in the two calibration steps plus the displaced
/// measurement at (α, β).
pub fn probability_set<S: Scalar>(
    params: &SystemParams<S>,
    alpha: Complex<S>,
    beta: Complex<S>,
) -> Result<ClickProbabilitySet<S>> {
    let [p_pp, p_pm, p_mp, p_mm] = no_displacement_joint_probs(params)?;
    let (pc_a1, pc_a2) = coincidence_probs(params)?;
    let set = ClickProbabilitySet {
        p_pp,
        p_pm,
        p_mp,
        p_mm,
        pc_a1,
        pc_a2,
        q_singles_a: local_click_prob_a1(params, alpha)?,
        q_singles_b: local_click_prob_a2(params, beta)?,
        q_joint: joint_click_prob(params, alpha, beta)?,
    };
    set.validate()?;
    Ok(set)
}

/// Real-displacement convenience wrapper around [`probability_set`].
pub fn probability_set_real<S: Scalar>(
    params: &SystemParams<S>,
    alpha: S,
    beta: S,
) -> Result<ClickProbabilitySet<S>> {
    probability_set(
        params,
        Complex::new(alpha, S::zero()),
        Complex::new(beta, S::zero()),
    )
}
