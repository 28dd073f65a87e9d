use nalgebra::DMatrix;
use num_complex::Complex64;
use optomech_witness::analytic::probability_set;
use optomech_witness::fock::{
    click_probabilities, displacement_op, ladder_ops, loss_channel, oracle_probability_set,
    simulate_protocol, Cutoff, TruncatedOperator, TwoModeState,
};
use optomech_witness::SystemParams;
use proptest::prelude::*;

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

/// No-click POVM element of an efficiency-`eta` detector, built from an
/// explicit beamsplitter with a vacuum ancilla: `E = Σ_k K_k† K_k` with
/// `K_k = ⟨0_det, k_anc| U |·, 0_anc⟩`.
fn ancilla_no_click(eta: f64, cutoff: usize) -> DMatrix<Complex64> {
    let (a, adag) = ladder_ops(cutoff).unwrap();
    let one = TruncatedOperator::identity(vec![cutoff]);
    let theta = eta.sqrt().acos();
    let hop = adag.kron(&one).mul(&one.kron(&a));
    let generator = (&hop.entries - hop.entries.adjoint()) * Complex64::new(theta, 0.0);
    let u = generator.exp();
    let mut e = DMatrix::<Complex64>::zeros(cutoff, cutoff);
    for k in 0..cutoff {
        // Row |0, k⟩, columns |n, 0⟩.
        let row = k;
        let kraus: Vec<Complex64> = (0..cutoff).map(|n| u[(row, n * cutoff)]).collect();
        for m in 0..cutoff {
            for n in 0..cutoff {
                e[(m, n)] += kraus[m].conj() * kraus[n];
            }
        }
    }
    e
}

fn small_state(seed: u64, support: usize) -> DMatrix<Complex64> {
    let n = support * support;
    let mut x = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    let mut next = || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let g = DMatrix::from_fn(n, 3, |_, _| Complex64::new(next(), next()));
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    rho / tr
}

#[test]
fn ancilla_detector_has_geometric_no_click_weights() {
    let (eta, c) = (0.37, 12);
    let e = ancilla_no_click(eta, c);
    let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_fn(c, |n, _| {
        Complex64::new((1.0 - eta).powi(n as i32), 0.0)
    }));
    assert!(max_abs(&(e - expect)) < 1e-12);
}

/// Loss η followed by a coherent no-click projector at the rescaled
/// amplitude equals displacing the lossless state by the full amplitude and
/// detecting it with an explicitly modeled inefficient detector.
#[test]
fn loss_then_rescaled_probe_equals_inefficient_detector() {
    let (support, big) = (4, 24);
    for (seed, eta, alpha, beta) in [
        (1, 0.3, Complex64::new(0.6, 0.0), Complex64::new(-0.4, 0.2)),
        (2, 0.8, Complex64::new(-0.3, 0.5), Complex64::new(0.7, 0.0)),
        (3, 1.0, Complex64::new(0.5, -0.5), Complex64::new(0.0, 0.0)),
    ] {
        let rho = small_state(seed, support);
        let state = TwoModeState::from_dense(support, &rho).unwrap().with_cutoff(big).unwrap();

        let lossy = loss_channel(&loss_channel(&state, 0, eta, 0.0).unwrap(), 1, eta, 0.0).unwrap();
        let (pa, pb, pab) = click_probabilities(&lossy, alpha, beta, eta).unwrap();

        let e = ancilla_no_click(eta, big);
        let povm = |amp: Complex64| {
            let d = displacement_op(amp, big).unwrap().entries;
            d.adjoint() * &e * d
        };
        let (fa, fb) = (povm(alpha), povm(beta));
        let id = DMatrix::<Complex64>::identity(big, big);
        let dense = state.to_dense().entries;
        let expect = |op: DMatrix<Complex64>| (&dense * op).trace().re;
        assert!((pa - expect(fa.kronecker(&id))).abs() < 1e-9);
        assert!((pb - expect(id.kronecker(&fb))).abs() < 1e-9);
        assert!((pab - expect(fa.kronecker(&fb))).abs() < 1e-9);
    }
}

#[test]
fn lossless_detector_sees_no_loss() {
    let rho = small_state(7, 3);
    let state = TwoModeState::from_dense(3, &rho).unwrap();
    let lossy = loss_channel(&state, 0, 1.0, 0.0).unwrap();
    assert!(lossy.max_abs_diff(&state).unwrap() < 1e-12);
}

fn params_strategy() -> impl Strategy<Value = SystemParams> {
    (0.0..0.5f64, 0.0..=1.0f64, 0.05..=1.0f64, 0.0..=1.0f64)
        .prop_map(|(p, t, eta, n0)| SystemParams::new(p, t, eta, n0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_agrees_and_stays_in_range(
        sp in params_strategy(),
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
    ) {
        let (a, b) = (Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0));
        let probe = sp.eta.sqrt() * alpha.abs().max(beta.abs());
        let state = simulate_protocol(&sp, Cutoff::Adaptive { probe }).unwrap();
        let oracle = oracle_probability_set(&state, a, b, sp.eta).unwrap();
        let closed = probability_set(&sp, a, b).unwrap();
        for (x, y) in oracle.measured().iter().zip(closed.measured()) {
            prop_assert!((x - y).abs() < 1e-8);
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(x));
        }
        prop_assert!((oracle.q_singles_a - closed.q_singles_a).abs() < 1e-8);
        prop_assert!((oracle.q_singles_b - closed.q_singles_b).abs() < 1e-8);
        prop_assert!((oracle.q_joint - closed.q_joint).abs() < 1e-8);
        for phi in [0.3, 1.1, 2.7] {
            let rotated = optomech_witness::fock::phase_rotate(&state, phi);
            prop_assert!(rotated.max_abs_diff(&state).unwrap() < 1e-10);
        }
    }
}
