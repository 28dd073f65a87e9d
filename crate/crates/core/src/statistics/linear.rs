use serde::{Deserialize, Serialize};

use crate::analytic::ClickProbabilitySet;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::witness::{sigma_element, DisplacementSetting};

/// Number of separately estimated probabilities, in the order of
/// [`ClickProbabilitySet::measured`]:
/// `[D++, D+−, D−+, D−−, P++, P+−, P−+, P−−, Pc(A₁), Pc(A₂)]`.
pub const MEASURED: usize = 10;

const D_PP: usize = 0;
const D_PM: usize = 1;
const D_MP: usize = 2;
const D_MM: usize = 3;
const P_PP: usize = 4;
const P_PM: usize = 5;
const P_MP: usize = 6;
const P_MM: usize = 7;
const PC_A1: usize = 8;
const PC_A2: usize = 9;

pub const DEFAULT_CALIBRATION_RUNS: f64 = 1e5;

/// `Var = P(1−P)/N` of a frequency estimated from `n` runs.
pub fn bernoulli_variance<S: Scalar>(p: S, n: u64) -> Result<S> {
    if n == 0 {
        return Err(Error::invalid("run count must be at least 1"));
    }
    if !(p >= S::zero() && p <= S::one()) {
        return Err(Error::invalid(format!("probability {p:?} outside [0, 1]")));
    }
    Ok(p * (S::one() - p) / S::from_u64(n).expect("run count fits the scalar type"))
}

/// Tangent points of the three square-root terms of the separable bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConstants<S> {
    pub k: [S; 6],
}

impl<S: Scalar> CalibrationConstants<S> {
    /// `k₁ = √(P−−/P++)`, `k₂ = √(P−+/P+−)`, `k₃ = √(P+−/Pc(A₂))`,
    /// `k₄ = √(P−−/Pc(A₂))`, `k₅ = √(P−+/Pc(A₁))`, `k₆ = √(P−−/Pc(A₁))`.
    pub fn from_probs(cal: &ClickProbabilitySet<S>) -> Result<Self> {
        let k = Self::ratios(cal, S::zero());
        if let Some(i) = k.iter().position(|v| !(v.is_finite() && *v > S::zero())) {
            return Err(Error::CalibrationDegenerate(format!(
                "k{} = {:?}; some calibration probability vanishes",
                i + 1,
                k[i]
            )));
        }
        Ok(Self { k })
    }

    /// As [`Self::from_probs`] with every probability floored at
    /// `1/(2·calibration_runs)`.
    pub fn regularized(cal: &ClickProbabilitySet<S>, calibration_runs: S) -> Result<Self> {
        if !(calibration_runs >= S::one()) {
            return Err(Error::invalid(format!(
                "calibration run count {calibration_runs:?} must be >= 1"
            )));
        }
        let floor = S::one() / (S::lit(2.0) * calibration_runs);
        Self::from_probs_floored(cal, floor)
    }

    fn from_probs_floored(cal: &ClickProbabilitySet<S>, floor: S) -> Result<Self> {
        let k = Self::ratios(cal, floor);
        if k.iter().any(|v| !(v.is_finite() && *v > S::zero())) {
            return Err(Error::CalibrationDegenerate(format!("constants {k:?}")));
        }
        Ok(Self { k })
    }

    fn ratios(cal: &ClickProbabilitySet<S>, floor: S) -> [S; 6] {
        let f = |v: S| v.max(floor);
        let (pp, pm, mp, mm) = (f(cal.p_pp), f(cal.p_pm), f(cal.p_mp), f(cal.p_mm));
        let (c1, c2) = (f(cal.pc_a1), f(cal.pc_a2));
        [
            (mm / pp).sqrt(),
            (mp / pm).sqrt(),
            (pm / c2).sqrt(),
            (mm / c2).sqrt(),
            (mp / c1).sqrt(),
            (mm / c1).sqrt(),
        ]
    }

    pub fn scaled(&self, factor: S) -> Self {
        Self {
            k: self.k.map(|v| v * factor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    First,
    Second,
}

/// `Σ cᵢ Pᵢ + offset` over the measured probabilities, together with the
/// branch taken in each of the three minimum terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFunctional<S> {
    pub coefficients: [S; MEASURED],
    pub offset: S,
    pub branches: [Branch; 3],
}

impl<S: Scalar> LinearFunctional<S> {
    pub fn new(coefficients: [S; MEASURED], offset: S) -> Self {
        Self {
            coefficients,
            offset,
            branches: [Branch::First; 3],
        }
    }

    pub fn apply(&self, probs: &[S; MEASURED]) -> S {
        self.coefficients
            .iter()
            .zip(probs)
            .fold(self.offset, |acc, (&c, &p)| acc + c * p)
    }

    /// Asymptotic variance `Σ cᵢ² Pᵢ(1−Pᵢ)/Nᵢ` for independent estimates.
    pub fn variance(&self, probs: &[S; MEASURED], counts: &[u64; MEASURED]) -> Result<S> {
        let mut v = S::zero();
        for i in 0..MEASURED {
            let c = self.coefficients[i];
            if c == S::zero() {
                continue;
            }
            v = v + c * c * bernoulli_variance(probs[i], counts[i])?;
        }
        Ok(v)
    }

    pub fn negated(&self) -> Self {
        Self {
            coefficients: self.coefficients.map(|c| -c),
            offset: -self.offset,
            branches: self.branches,
        }
    }
}

struct Weights<S> {
    x00: S,
    x11: S,
    y00: S,
    y11: S,
    qubit: S,
    a2: S,
    a1: S,
}

fn weights<S: Scalar>(setting: &DisplacementSetting<S>) -> Result<Weights<S>> {
    let (x, y) = setting.magnitudes();
    let s = |i, j, v| sigma_element(i, j, v);
    Ok(Weights {
        x00: s(0, 0, x)?,
        x11: s(1, 1, x)?,
        y00: s(0, 0, y)?,
        y11: s(1, 1, y)?,
        qubit: (s(0, 1, x)? * s(0, 1, y)?).abs(),
        a2: S::SQRT_2() * (s(0, 1, x)? * s(1, 2, y)?).abs(),
        a1: S::SQRT_2() * (s(1, 2, x)? * s(0, 1, y)?).abs(),
    })
}

/// `(weight, [(k, index of k-term, index of 1/k-term); 2])`.
type MinTerm<S> = (S, [(S, usize, usize); 2]);

/// The three minimum terms.
fn min_terms<S: Scalar>(w: &Weights<S>, k: &CalibrationConstants<S>) -> [MinTerm<S>; 3] {
    let k = k.k;
    [
        (w.qubit, [(k[0], P_PP, P_MM), (k[1], P_PM, P_MP)]),
        (w.a2, [(k[2], PC_A2, P_PM), (k[3], PC_A2, P_MM)]),
        (w.a1, [(k[4], PC_A1, P_MP), (k[5], PC_A1, P_MM)]),
    ]
}

/// Linear upper bound on the separable bound, using `2√(ab) ≤ k·a + b/k`
/// in each square-root term. The functional has no `Q` part; its value at
/// `probs` is returned alongside.
pub fn linearized_bound<S: Scalar>(
    probs: &ClickProbabilitySet<S>,
    setting: &DisplacementSetting<S>,
    k: &CalibrationConstants<S>,
) -> Result<(LinearFunctional<S>, S)> {
    probs.validate_ranges()?;
    let p = probs.measured();
    let w = weights(setting)?;
    let mut branches = [Branch::First; 3];
    for (slot, (_, options)) in min_terms(&w, k).iter().enumerate() {
        let value = |(kk, a, b): (S, usize, usize)| kk * p[a] + p[b] / kk;
        if value(options[1]) < value(options[0]) {
            branches[slot] = Branch::Second;
        }
    }
    let f = bound_functional(&w, k, branches);
    Ok((f, f.apply(&p)))
}

fn bound_functional<S: Scalar>(
    w: &Weights<S>,
    k: &CalibrationConstants<S>,
    branches: [Branch; 3],
) -> LinearFunctional<S> {
    let mut c = [S::zero(); MEASURED];
    c[P_PP] = w.x00 * w.y00;
    c[P_PM] = w.x00 * w.y11;
    c[P_MP] = w.x11 * w.y00;
    c[P_MM] = w.x11 * w.y11;
    for ((weight, options), branch) in min_terms(w, k).into_iter().zip(branches) {
        let (kk, a, b) = options[match branch {
            Branch::First => 0,
            Branch::Second => 1,
        }];
        c[a] = c[a] + weight * kk;
        c[b] = c[b] + weight / kk;
    }
    let two = S::lit(2.0);
    c[PC_A1] = c[PC_A1] + two;
    c[PC_A2] = c[PC_A2] + two;
    LinearFunctional {
        coefficients: c,
        offset: S::zero(),
        branches,
    }
}

/// `Q − S*_linear` as one functional: `Q = D++ − D+− − D−+ + D−−` minus the
/// linearized bound with the given branch choices.
pub fn estimator_functional<S: Scalar>(
    setting: &DisplacementSetting<S>,
    k: &CalibrationConstants<S>,
    branches: [Branch; 3],
) -> Result<LinearFunctional<S>> {
    let w = weights(setting)?;
    let mut f = bound_functional(&w, k, branches).negated();
    f.coefficients[D_PP] = S::one();
    f.coefficients[D_PM] = -S::one();
    f.coefficients[D_MP] = -S::one();
    f.coefficients[D_MM] = S::one();
    Ok(f)
}

/// Estimator with constants and branches fixed from a calibration set.
pub fn calibrated_estimator<S: Scalar>(
    cal: &ClickProbabilitySet<S>,
    setting: &DisplacementSetting<S>,
    k: &CalibrationConstants<S>,
) -> Result<LinearFunctional<S>> {
    let (bound, _) = linearized_bound(cal, setting, k)?;
    estimator_functional(setting, k, bound.branches)
}
