use num_complex::Complex64;

use super::operator::{probe_cutoff, two_mode_squeeze_op};
use super::state::{loss_channel, thermal_state, TwoModeState};
use crate::analytic::{inclusion_exclusion, ClickProbabilitySet};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Largest cutoff the adaptive search will try.
pub const MAX_CUTOFF: usize = 320;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cutoff {
    Fixed(usize),
    /// Start from a cutoff sized for the state and for coherent probes of
    /// magnitude up to `probe` (already scaled by `√η`), doubling until the
    /// tail check passes.
    Adaptive { probe: f64 },
}

/// Initial cutoff of the adaptive search: `max(20, ⌈m̄ + 6√m̄ + 10⌉)` with
/// `m̄` the largest of the mean phonon number after squeezing and `probe²`.
pub fn adaptive_start(params: &SystemParams<f64>, probe: f64) -> usize {
    let pairs = params.p / (1.0 - params.p);
    let phonons = params.n0 + pairs * (1.0 + params.n0);
    let mean = phonons.max(probe * probe);
    20.max((mean + 6.0 * mean.sqrt() + 10.0).ceil() as usize)
}

/// State of the two detected optical modes.
///
/// Steps: photon vacuum ⊗ thermal phonons, two-mode squeezing with
/// `sinh²r = p/(1−p)` at phase π/2, phonon-to-photon swap as a loss channel
/// of transmissivity `T` at phase π/2 (mode 1 is relabeled from phonon to
/// photon), then detection loss `η` on both modes.
pub fn simulate_protocol(params: &SystemParams<f64>, cutoff: Cutoff) -> Result<TwoModeState> {
    params.validate()?;
    match cutoff {
        Cutoff::Fixed(c) => build(params, c),
        Cutoff::Adaptive { probe } => {
            let mut c = adaptive_start(params, probe);
            loop {
                match build(params, c) {
                    Err(Error::UnderTruncation { .. }) if c < MAX_CUTOFF => {
                        c = (2 * c).min(MAX_CUTOFF);
                    }
                    other => return other,
                }
            }
        }
    }
}

/// Both marginals of a two-mode squeezed thermal state are thermal; a
/// cutoff whose predicted tail already fails is rejected before any
/// matrix work.
fn predicted_tail(params: &SystemParams<f64>, cutoff: usize) -> f64 {
    let pairs = params.p / (1.0 - params.p);
    let photons = pairs * (1.0 + params.n0);
    let phonons = params.n0 + photons;
    let top_two = |m: f64| {
        let q = m / (1.0 + m);
        q.powi(cutoff as i32 - 2) * (1.0 + q) / (1.0 + m)
    };
    top_two(photons).max(top_two(phonons))
}

fn build(params: &SystemParams<f64>, cutoff: usize) -> Result<TwoModeState> {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let tail = predicted_tail(params, cutoff);
    if tail >= 1e-10 {
        return Err(Error::UnderTruncation {
            cutoff,
            tail,
            context: "predicted squeezed-thermal marginals".into(),
        });
    }
    let start = TwoModeState::product(
        &thermal_state(0.0, cutoff)?,
        &thermal_state(params.n0, cutoff)?,
    )?;
    let squeeze = two_mode_squeeze_op(params.squeeze_magnitude(), half_pi, cutoff)?;
    let squeezed = start.conjugate_by(&squeeze)?;
    squeezed.check_tail("after two-mode squeezing")?;
    let swapped = loss_channel(&squeezed, 1, params.t, half_pi)?;
    let detected = loss_channel(&loss_channel(&swapped, 0, params.eta, 0.0)?, 1, params.eta, 0.0)?;
    detected.validate()?;
    Ok(detected)
}

fn coherent_amplitudes(x: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut v = Vec::with_capacity(cutoff);
    let mut amp = Complex64::new((-0.5 * x.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        if n > 0 {
            amp = amp * x / (n as f64).sqrt();
        }
        v.push(amp);
    }
    v
}

fn check_probe(x: Complex64, cutoff: usize) -> Result<()> {
    let need = probe_cutoff(x.norm());
    if cutoff < need {
        return Err(Error::UnderTruncation {
            cutoff,
            tail: f64::NAN,
            context: format!("coherent probe |x| = {} needs cutoff >= {need}", x.norm()),
        });
    }
    Ok(())
}

/// `(P(+1|α), P(+1|β), P(+1+1|α,β))` for a state that already carries the
/// detection loss. The no-click projector is the coherent state at
/// `x = −√η α` (resp. `y = −√η β`).
pub fn click_probabilities(
    state: &TwoModeState,
    alpha: Complex64,
    beta: Complex64,
    eta: f64,
) -> Result<(f64, f64, f64)> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::invalid(format!("eta = {eta} outside (0, 1]")));
    }
    let c = state.cutoff();
    let (x, y) = (-alpha * eta.sqrt(), -beta * eta.sqrt());
    check_probe(x, c)?;
    check_probe(y, c)?;
    let (u, v) = (coherent_amplitudes(x, c), coherent_amplitudes(y, c));
    let single = |mode: usize, w: &[Complex64]| -> Result<f64> {
        let r = state.reduced(mode)?;
        let w = nalgebra::DVector::from_column_slice(w);
        Ok(r.expectation(&w).re)
    };
    Ok((
        single(0, &u)?,
        single(1, &v)?,
        state.product_expectation(&u, &v).re,
    ))
}

/// Probability that both outputs of a 50/50 splitter fed by `mode` (and
/// vacuum) register at least one photon.
pub fn coincidence_probability(state: &TwoModeState, mode: usize) -> Result<f64> {
    let pops = state.marginal(mode)?;
    // n photons split binomially; one given output stays dark with probability 2^{-n}.
    let one_dark: f64 = pops
        .iter()
        .enumerate()
        .map(|(n, p)| p * 0.5f64.powi(n as i32))
        .sum();
    Ok(1.0 - 2.0 * one_dark + pops[0])
}

/// The calibration and displaced probabilities of [`ClickProbabilitySet`]
/// computed from a simulated state.
pub fn oracle_probability_set(
    state: &TwoModeState,
    alpha: Complex64,
    beta: Complex64,
    eta: f64,
) -> Result<ClickProbabilitySet<f64>> {
    let zero = Complex64::new(0.0, 0.0);
    let (a, b, pp) = click_probabilities(state, zero, zero, eta)?;
    let [p_pp, p_pm, p_mp, p_mm] = inclusion_exclusion(a, b, pp)?;
    let (q_singles_a, q_singles_b, q_joint) = click_probabilities(state, alpha, beta, eta)?;
    Ok(ClickProbabilitySet {
        p_pp,
        p_pm,
        p_mp,
        p_mm,
        pc_a1: coincidence_probability(state, 0)?,
        pc_a2: coincidence_probability(state, 1)?,
        q_singles_a,
        q_singles_b,
        q_joint,
    })
}

/// Simulates the protocol with an adaptive cutoff sized for the probes and
/// returns the oracle probability set.
pub fn protocol_probability_set(
    params: &SystemParams<f64>,
    alpha: Complex64,
    beta: Complex64,
) -> Result<ClickProbabilitySet<f64>> {
    let probe = params.eta.sqrt() * alpha.norm().max(beta.norm());
    let state = simulate_protocol(params, Cutoff::Adaptive { probe })?;
    oracle_probability_set(&state, alpha, beta, params.eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::probability_set;
    use approx::assert_abs_diff_eq;

    fn params(p: f64, t: f64, eta: f64, n0: f64) -> SystemParams<f64> {
        SystemParams::new(p, t, eta, n0).unwrap()
    }

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn max_set_diff(a: &ClickProbabilitySet<f64>, b: &ClickProbabilitySet<f64>) -> f64 {
        let flat = |s: &ClickProbabilitySet<f64>| {
            [s.p_pp, s.p_pm, s.p_mp, s.p_mm, s.pc_a1, s.pc_a2, s.q_singles_a, s.q_singles_b, s.q_joint]
        };
        flat(a)
            .iter()
            .zip(flat(b).iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn nothing_created_is_vacuum() {
        let s = simulate_protocol(&params(0.0, 0.4, 0.7, 0.0), Cutoff::Fixed(20)).unwrap();
        let vac = TwoModeState::vacuum(20).unwrap();
        assert!(s.max_abs_diff(&vac).unwrap() < 1e-14);
    }

    #[test]
    fn ideal_squeezed_vacuum_populations() {
        let p = 0.5;
        let s = simulate_protocol(&params(p, 1.0, 1.0, 0.0), Cutoff::Adaptive { probe: 0.0 }).unwrap();
        let pops = s.populations();
        assert_abs_diff_eq!(pops[(0, 0)], 0.5, epsilon = 1e-12);
        for n in 0..12 {
            assert_abs_diff_eq!(pops[(n, n)], (1.0 - p) * p.powi(n as i32), epsilon = 1e-12);
            for m in 0..12 {
                if m != n {
                    assert!(pops[(n, m)].abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn no_conversion_leaves_thermal_a1() {
        let (p, eta, n0) = (0.3, 0.6, 0.4);
        let s = simulate_protocol(&params(p, 0.0, eta, n0), Cutoff::Adaptive { probe: 0.0 }).unwrap();
        let m2 = s.marginal(1).unwrap();
        assert_abs_diff_eq!(m2[0], 1.0, epsilon = 1e-12);
        // A squeezed vacuum half with a thermal partner is thermal with mean
        // sinh²r (1 + n0); loss scales the mean by eta.
        let mean = eta * p * (1.0 + n0) / (1.0 - p);
        let expect = thermal_state(mean, s.cutoff()).unwrap();
        let got = s.reduced(0).unwrap();
        assert!(super::super::operator::max_abs(&(got.entries - expect.entries)) < 1e-12);
    }

    #[test]
    fn click_probability_examples() {
        let vac = TwoModeState::vacuum(20).unwrap();
        let (a, b, ab) = click_probabilities(&vac, re(0.0), re(0.0), 0.4).unwrap();
        assert_eq!((a, b, ab), (1.0, 1.0, 1.0));
        let (a, b, ab) = click_probabilities(&vac, re(1.0), re(0.0), 1.0).unwrap();
        assert_abs_diff_eq!(a, (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(b, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ab, (-1.0f64).exp(), epsilon = 1e-15);
        assert!(matches!(
            click_probabilities(&vac, re(3.0), re(0.0), 1.0),
            Err(Error::UnderTruncation { .. })
        ));
    }

    #[test]
    fn coincidence_examples() {
        let vac = TwoModeState::vacuum(6).unwrap();
        assert_eq!(coincidence_probability(&vac, 0).unwrap(), 0.0);

        let one = thermal_state(0.0, 6).unwrap();
        let mut single = nalgebra::DMatrix::<Complex64>::zeros(6, 6);
        single[(1, 1)] = re(1.0);
        let fock1 = TwoModeState::product(
            &super::super::TruncatedOperator::new(vec![6], single).unwrap(),
            &one,
        )
        .unwrap();
        assert_abs_diff_eq!(coincidence_probability(&fock1, 0).unwrap(), 0.0, epsilon = 1e-15);

        // Thermal of mean 1 split in half: 1 − 2/(1 + 1/2) + 1/2.
        let th = TwoModeState::product(&thermal_state(1.0, 60).unwrap(), &thermal_state(0.0, 60).unwrap()).unwrap();
        let pc = coincidence_probability(&th, 0).unwrap();
        assert_abs_diff_eq!(pc, 1.0 / 6.0, epsilon = 1e-12);
        let (pc1, _) = crate::analytic::coincidence_probs(&params(0.5, 1.0, 1.0, 0.0)).unwrap();
        assert_abs_diff_eq!(pc, pc1, epsilon = 1e-12);
        assert!(coincidence_probability(&th, 2).is_err());
    }

    #[test]
    fn feasibility_point_matches_closed_form() {
        let sp = params(0.284, 0.3, 0.1, 0.2);
        let (a, b) = (re(2.63), re(-2.63));
        let oracle = protocol_probability_set(&sp, a, b).unwrap();
        let closed = probability_set(&sp, a, b).unwrap();
        assert!(max_set_diff(&oracle, &closed) < 1e-8, "{oracle:?}\n{closed:?}");
    }

    #[test]
    fn complex_displacements_match_closed_form() {
        let sp = params(0.35, 0.7, 0.6, 0.5);
        let (a, b) = (Complex64::new(0.4, -1.1), Complex64::new(-0.8, 0.3));
        let oracle = protocol_probability_set(&sp, a, b).unwrap();
        let closed = probability_set(&sp, a, b).unwrap();
        assert!(max_set_diff(&oracle, &closed) < 1e-8, "{oracle:?}\n{closed:?}");
    }

    #[test]
    fn protocol_state_is_phase_invariant() {
        let s = simulate_protocol(&params(0.4, 0.8, 0.7, 0.6), Cutoff::Adaptive { probe: 0.0 }).unwrap();
        for phi in [0.3, 1.1, 2.7] {
            assert!(phase_rotate_diff(&s, phi) < 1e-10);
        }
    }

    fn phase_rotate_diff(s: &TwoModeState, phi: f64) -> f64 {
        super::super::phase_rotate(s, phi).max_abs_diff(s).unwrap()
    }

    #[test]
    fn perfect_pairs_never_split() {
        let sp = params(0.3, 1.0, 1.0, 0.0);
        let set = protocol_probability_set(&sp, re(0.0), re(0.0)).unwrap();
        assert!(set.p_pm.abs() < 1e-10);
        assert!(set.p_mp.abs() < 1e-10);
    }

    #[test]
    fn fixed_cutoff_too_small_is_reported() {
        let r = simulate_protocol(&params(0.5, 1.0, 1.0, 1.0), Cutoff::Fixed(20));
        assert!(matches!(r, Err(Error::UnderTruncation { .. })));
        assert!(matches!(
            simulate_protocol(&SystemParams { p: 1.0, t: 0.5, eta: 0.5, n0: 0.0 }, Cutoff::Fixed(20)),
            Err(Error::Domain(_))
        ));
    }
}
