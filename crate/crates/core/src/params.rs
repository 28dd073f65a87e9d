//! Experiment parameters: the four dimensionless knobs consumed by every
//! probability formula, and the laboratory rates they are derived from.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Pair-creation probability `p`, conversion efficiency `t`, detection
/// efficiency `eta` and initial mean phonon number `n0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams<S> {
    pub p: S,
    pub t: S,
    pub eta: S,
    pub n0: S,
}

impl<S: Scalar> SystemParams<S> {
    pub fn new(p: S, t: S, eta: S, n0: S) -> Result<Self> {
        let params = Self { p, t, eta, n0 };
        params.validate()?;
        Ok(params)
    }

    /// Checks the ranges `p ∈ [0,1)`, `t ∈ [0,1]`, `eta ∈ (0,1]`, `n0 ≥ 0`.
    pub fn validate(&self) -> Result<()> {
        let (zero, one) = (S::zero(), S::one());
        let all_finite = [self.p, self.t, self.eta, self.n0]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::invalid(format!("non-finite parameter in {self:?}")));
        }
        if self.p < zero {
            return Err(Error::invalid(format!("p = {:?} is negative", self.p)));
        }
        if self.p >= one {
            return Err(Error::Domain(format!(
                "p = {:?}: pair-creation probability must stay below 1",
                self.p
            )));
        }
        if self.t < zero || self.t > one {
            return Err(Error::invalid(format!("T = {:?} outside [0, 1]", self.t)));
        }
        if self.eta <= zero || self.eta > one {
            return Err(Error::invalid(format!("eta = {:?} outside (0, 1]", self.eta)));
        }
        if self.n0 < zero {
            return Err(Error::invalid(format!("n0 = {:?} is negative", self.n0)));
        }
        Ok(())
    }

    /// Squeeze magnitude `r` with `sinh²r = p/(1-p)`.
    pub fn squeeze_magnitude(&self) -> S {
        // tanh²r = p
        self.p.sqrt().atanh()
    }

    pub fn cast<U: Scalar>(&self) -> SystemParams<U> {
        let c = |v: S| U::lit(v.to_f64().unwrap_or(f64::NAN));
        SystemParams {
            p: c(self.p),
            t: c(self.t),
            eta: c(self.eta),
            n0: c(self.n0),
        }
    }
}

/// Laboratory description of the two-pulse sequence.
///
/// Rates are angular frequencies in rad/s; durations in seconds. Use
/// [`HardwareParams::from_frequencies`] when quoting rates as `f = ω/2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardwareParams<S> {
    /// Bare opto-mechanical coupling rate g₀.
    pub g0: S,
    /// Cavity energy decay rate κ.
    pub kappa: S,
    /// Mechanical frequency Ω_m.
    pub omega_m: S,
    /// Intra-cavity photon number during the blue-detuned pulse.
    pub n_plus: S,
    /// Intra-cavity photon number during the red-detuned pulse.
    pub n_minus: S,
    /// Blue-detuned pulse duration.
    pub t1: S,
    /// Red-detuned pulse duration.
    pub t2: S,
    /// Initial mean thermal phonon number.
    pub n0: S,
}

impl<S: Scalar> HardwareParams<S> {
    /// Builds the parameter block from frequencies quoted as ω/2π (Hz).
    #[allow(clippy::too_many_arguments)]
    pub fn from_frequencies(
        g0_hz: S,
        kappa_hz: S,
        omega_m_hz: S,
        n_plus: S,
        n_minus: S,
        t1: S,
        t2: S,
        n0: S,
    ) -> Self {
        let two_pi = S::TAU();
        Self {
            g0: g0_hz * two_pi,
            kappa: kappa_hz * two_pi,
            omega_m: omega_m_hz * two_pi,
            n_plus,
            n_minus,
            t1,
            t2,
            n0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let zero = S::zero();
        for (name, v) in [("g0", self.g0), ("kappa", self.kappa), ("omega_m", self.omega_m)] {
            if !(v.is_finite() && v > zero) {
                return Err(Error::invalid(format!("{name} = {v:?} must be positive")));
            }
        }
        for (name, v) in [
            ("n_plus", self.n_plus),
            ("n_minus", self.n_minus),
            ("t1", self.t1),
            ("t2", self.t2),
            ("n0", self.n0),
        ] {
            if !(v.is_finite() && v >= zero) {
                return Err(Error::invalid(format!("{name} = {v:?} must be non-negative")));
            }
        }
        Ok(())
    }

    /// Regime checks that do not prevent evaluation: resolved sideband
    /// (κ < Ω_m) and weak coupling (g₀ < κ).
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.kappa >= self.omega_m {
            out.push(format!(
                "not in the resolved-sideband regime: kappa = {:?} >= omega_m = {:?}",
                self.kappa, self.omega_m
            ));
        }
        if self.g0 >= self.kappa {
            out.push(format!(
                "not in the weak-coupling regime: g0 = {:?} >= kappa = {:?}",
                self.g0, self.kappa
            ));
        }
        out
    }

    /// Effective pair-creation rate `2 g₀² n₊ / κ`.
    pub fn blue_rate(&self) -> S {
        S::lit(2.0) * self.g0 * self.g0 * self.n_plus / self.kappa
    }

    /// Effective state-swap rate `2 g₀² n₋ / κ`.
    pub fn red_rate(&self) -> S {
        S::lit(2.0) * self.g0 * self.g0 * self.n_minus / self.kappa
    }

    /// `1 - exp(-2 g̃₊ T₁)`.
    pub fn pair_probability(&self) -> S {
        -(-S::lit(2.0) * self.blue_rate() * self.t1).exp_m1()
    }

    /// `1 - exp(-2 g̃₋ T₂)`.
    pub fn conversion_efficiency(&self) -> S {
        -(-S::lit(2.0) * self.red_rate() * self.t2).exp_m1()
    }

    /// Maps the hardware block to [`SystemParams`]; `eta` is the overall
    /// detection efficiency, which the rates do not determine.
    pub fn to_system_params(&self, eta: S) -> Result<SystemParams<S>> {
        self.validate()?;
        SystemParams::new(self.pair_probability(), self.conversion_efficiency(), eta, self.n0)
    }
}
