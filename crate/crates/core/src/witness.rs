//! Witness value `Q(α,β)` and the largest value `S*(α,β)` any separable
//! state can reach given the calibration statistics.
//!
//! `Q` computed from fixed-phase click statistics equals the phase-averaged
//! witness mean only for states invariant under opposite phase rotations of
//! the two modes. The protocol states have this property; for an arbitrary
//! state, average it first (see [`crate::fock::TwoModeState::phase_averaged`]).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::analytic::{probability_set, ClickProbabilitySet};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::scalar::Scalar;

/// Displacements as seen by unit-efficiency detectors: `x = √η·α`, `y = √η·β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplacementSetting<S> {
    pub x: Complex<S>,
    pub y: Complex<S>,
}

impl<S: Scalar> DisplacementSetting<S> {
    pub fn new(x: Complex<S>, y: Complex<S>) -> Result<Self> {
        if !(x.re.is_finite() && x.im.is_finite() && y.re.is_finite() && y.im.is_finite()) {
            return Err(Error::invalid("displacement setting must be finite"));
        }
        Ok(Self { x, y })
    }

    pub fn real(x: S, y: S) -> Result<Self> {
        Self::new(Complex::new(x, S::zero()), Complex::new(y, S::zero()))
    }

    /// Effective setting for amplitudes `alpha`, `beta` and detection efficiency `eta`.
    pub fn from_amplitudes(alpha: Complex<S>, beta: Complex<S>, eta: S) -> Result<Self> {
        let s = eta.sqrt();
        Self::new(alpha * s, beta * s)
    }

    /// `(|x|, |y|)`; the bound only depends on the magnitudes.
    pub fn magnitudes(&self) -> (S, S) {
        (self.x.norm(), self.y.norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WitnessEvaluation<S> {
    pub q: S,
    pub s_star: S,
    pub diff: S,
    pub setting: DisplacementSetting<S>,
    pub params: Option<SystemParams<S>>,
}

impl<S: Scalar> WitnessEvaluation<S> {
    pub fn witnesses_entanglement(&self) -> bool {
        self.diff > S::zero()
    }
}

/// Fock-basis matrix element `⟨i|σ_x|j⟩` of the displaced click observable
/// `D(x)†(2|0⟩⟨0| − 1)D(x)` for real `x`.
///
/// Supported pairs: (0,0), (1,1), (0,1), (0,2), (1,2) and their transposes.
pub fn sigma_element<S: Scalar>(i: usize, j: usize, x: S) -> Result<S> {
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    let e = (-x * x).exp();
    let (one, two) = (S::one(), S::lit(2.0));
    let sqrt2 = S::SQRT_2();
    let v = match (lo, hi) {
        (0, 0) => -one + two * e,
        (1, 1) => -one + two * x * x * e,
        (0, 1) => -two * x * e,
        (0, 2) => sqrt2 * x * x * e,
        (1, 2) => -sqrt2 * x * x * x * e,
        _ => {
            return Err(Error::invalid(format!(
                "matrix element <{i}|sigma|{j}> is not part of the bound"
            )))
        }
    };
    Ok(v)
}

/// `Q = 1 − 2P(+1|α) − 2P(+1|β) + 4P(+1+1|α,β)`.
pub fn q_value<S: Scalar>(single_a: S, single_b: S, joint: S) -> Result<S> {
    let q = S::one() - S::lit(2.0) * single_a - S::lit(2.0) * single_b + S::lit(4.0) * joint;
    let slack = S::one() + S::lit(1e-9).max(S::epsilon() * S::lit(64.0));
    if !q.is_finite() || q.abs() > slack {
        return Err(Error::Inconsistent(format!(
            "Q = {q:?} from singles ({single_a:?}, {single_b:?}) and joint {joint:?}"
        )));
    }
    Ok(q)
}

fn sigma<S: Scalar>(i: usize, j: usize, x: S) -> S {
    sigma_element(i, j, x).expect("supported pair")
}

/// Separable bound from the undisplaced joint outcomes and the coincidences.
pub fn separable_bound<S: Scalar>(
    probs: &ClickProbabilitySet<S>,
    setting: &DisplacementSetting<S>,
) -> Result<S> {
    probs.validate_ranges()?;
    let (x, y) = setting.magnitudes();
    let two = S::lit(2.0);
    let two_sqrt2 = two * S::SQRT_2();
    let ClickProbabilitySet {
        p_pp,
        p_pm,
        p_mp,
        p_mm,
        pc_a1,
        pc_a2,
        ..
    } = probs.clamped();

    let populations = sigma(0, 0, x) * sigma(0, 0, y) * p_pp
        + sigma(0, 0, x) * sigma(1, 1, y) * p_pm
        + sigma(1, 1, x) * sigma(0, 0, y) * p_mp
        + sigma(1, 1, x) * sigma(1, 1, y) * p_mm;
    let qubit_coherence = two
        * (sigma(0, 1, x) * sigma(1, 0, y)).abs()
        * (p_pp * p_mm).sqrt().min((p_pm * p_mp).sqrt());
    let a2_coherence = two_sqrt2
        * (sigma(1, 0, x) * sigma(1, 2, y)).abs()
        * (pc_a2 * p_pm).sqrt().min((pc_a2 * p_mm).sqrt());
    let a1_coherence = two_sqrt2
        * (sigma(1, 2, x) * sigma(1, 0, y)).abs()
        * (pc_a1 * p_mp).sqrt().min((pc_a1 * p_mm).sqrt());
    let multi_photon = two * pc_a1 + two * pc_a2;

    let s = populations + qubit_coherence + a2_coherence + a1_coherence + multi_photon;
    if !s.is_finite() {
        return Err(Error::Numerical("separable bound is not finite".into()));
    }
    Ok(s)
}

/// Q, S* and their difference from one probability set.
pub fn evaluate_set<S: Scalar>(
    probs: &ClickProbabilitySet<S>,
    setting: DisplacementSetting<S>,
) -> Result<WitnessEvaluation<S>> {
    let q = q_value(probs.q_singles_a, probs.q_singles_b, probs.q_joint)?;
    let s_star = separable_bound(probs, &setting)?;
    Ok(WitnessEvaluation {
        q,
        s_star,
        diff: q - s_star,
        setting,
        params: None,
    })
}

/// Witness evaluation on the closed-form statistics of the protocol.
pub fn evaluate<S: Scalar>(
    params: &SystemParams<S>,
    alpha: Complex<S>,
    beta: Complex<S>,
) -> Result<WitnessEvaluation<S>> {
    let probs = probability_set(params, alpha, beta)?;
    let setting = DisplacementSetting::from_amplitudes(alpha, beta, params.eta)?;
    let mut eval = evaluate_set(&probs, setting)?;
    eval.params = Some(*params);
    Ok(eval)
}

/// [`evaluate`] for real displacement amplitudes.
pub fn evaluate_real<S: Scalar>(
    params: &SystemParams<S>,
    alpha: S,
    beta: S,
) -> Result<WitnessEvaluation<S>> {
    evaluate(
        params,
        Complex::new(alpha, S::zero()),
        Complex::new(beta, S::zero()),
    )
}
