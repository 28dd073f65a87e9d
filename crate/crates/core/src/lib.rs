//! Entanglement witness for pulsed opto-mechanical photon-phonon pairs
//! read out with displaced on/off detectors.
//!
//! The core is generic over the floating-point type where the formulas are
//! closed form; the Fock-space oracle and the optimizer work in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod error;
pub mod fock;
pub mod optimizer;
pub mod params;
pub mod scalar;
pub mod statistics;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SystemParams = params::SystemParams<f64>;
pub type HardwareParams = params::HardwareParams<f64>;
pub type ClickProbabilitySet = analytic::ClickProbabilitySet<f64>;
pub type DisplacementSetting = witness::DisplacementSetting<f64>;
pub type WitnessEvaluation = witness::WitnessEvaluation<f64>;

pub type SystemParamsF32 = params::SystemParams<f32>;
pub type ClickProbabilitySetF32 = analytic::ClickProbabilitySet<f32>;
pub type DisplacementSettingF32 = witness::DisplacementSetting<f32>;
pub type LinearFunctional = statistics::LinearFunctional<f64>;
pub type CalibrationConstants = statistics::CalibrationConstants<f64>;
