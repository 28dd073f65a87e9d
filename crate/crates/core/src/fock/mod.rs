//! Truncated Fock-space simulation of the protocol, used as ground truth
//! for the closed-form probabilities.

mod operator;
mod protocol;
mod sector;
mod state;

pub use operator::{displacement_op, ladder_ops, probe_cutoff, two_mode_squeeze_op, SectorOperator, TruncatedOperator};
pub use protocol::{
    adaptive_start, click_probabilities, coincidence_probability, oracle_probability_set,
    protocol_probability_set, simulate_protocol, Cutoff, MAX_CUTOFF,
};
pub use state::{loss_channel, phase_rotate, thermal_state, TwoModeState};
