//! Property tests for the state algebra, the transforms and the rate
//! formulas.

use proptest::prelude::*;

use qrkey::analytic;
use qrkey::bell::{self, BellDiagonalState, CHSH_MAX};
use qrkey::hqr::{self, HqrGateParams};
use qrkey::keyrate::{self, HardwareParams, RepeaterConfig, Setup};
use qrkey::oqr;
use qrkey::rates::{self, LinkBudget};

fn bell_state_strategy() -> impl Strategy<Value = BellDiagonalState> {
    [0.0f64..1.0, 0.0..1.0, 0.0..1.0, 0.0..1.0].prop_filter_map("degenerate weights", |raw| {
        let sum: f64 = raw.iter().sum();
        if sum < 1e-3 {
            return None;
        }
        BellDiagonalState::new(raw.map(|x| x / sum)).ok()
    })
}

proptest! {
    #[test]
    fn detector_noise_preserves_normalization(
        state in bell_state_strategy(),
        eta in 0.0f64..=1.0,
    ) {
        let noisy = bell::apply_detector_noise(&state, eta).unwrap();
        let sum: f64 = noisy.coeffs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn di_observables_are_consistent_with_the_noisy_state(
        state in bell_state_strategy(),
        eta in 0.0f64..=1.0,
    ) {
        let obs = bell::di_observables(&state, eta).unwrap();
        let noisy = bell::apply_detector_noise(&state, eta).unwrap();
        prop_assert!((obs.q_z - bell::qber_xz(&noisy).1).abs() < 1e-12);
        prop_assert!((obs.s - noisy.chsh()).abs() < 1e-12);
        // Tsirelson bound
        prop_assert!(obs.s.abs() <= CHSH_MAX + 1e-9);
    }

    #[test]
    fn chsh_grows_with_detector_efficiency(
        state in bell_state_strategy(),
        eta_lo in 0.05f64..0.95,
        delta in 0.01f64..0.05,
    ) {
        prop_assume!(state.c1() > state.c4() + 1e-6);
        let lo = bell::di_observables(&state, eta_lo).unwrap().s;
        let hi = bell::di_observables(&state, eta_lo + delta).unwrap().s;
        prop_assert!(hi > lo);
    }

    #[test]
    fn distillation_success_stays_in_range(
        state in bell_state_strategy(),
        p_g in 0.0f64..=1.0,
    ) {
        let out = oqr::ed_round_oqr(&state, p_g).unwrap();
        prop_assert!(out.p_success >= 0.5 - 1e-12 && out.p_success <= 1.0 + 1e-12);
        let sum: f64 = out.state.coeffs().iter().sum();
        prop_assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn swap_is_affine_in_gate_quality(
        state in bell_state_strategy(),
        p_g in 0.0f64..=1.0,
    ) {
        let ideal = oqr::es_level_oqr(&state, 1.0).coeffs();
        let got = oqr::es_level_oqr(&state, p_g).coeffs();
        for (g, i) in got.iter().zip(ideal) {
            prop_assert!((g - ((1.0 - p_g) / 4.0 + p_g * i)).abs() < 1e-12);
        }
    }

    #[test]
    fn deutsch_normalizer_identity(state in bell_state_strategy()) {
        // (1 + (2s−1)²)/2 == s² + (1−s)² at s = c1 + c4
        let s = state.c1() + state.c4();
        let lhs = 0.5 * (1.0 + (2.0 * s - 1.0).powi(2));
        let rhs = s * s + (1.0 - s) * (1.0 - s);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn hybrid_transforms_keep_reachable_states_normalized(
        f0 in 0.5f64..=1.0,
        p_g in 0.9f64..=1.0,
        ops in proptest::collection::vec(0u8..2, 0..5),
    ) {
        let params = HqrGateParams::from_gate_quality(p_g).unwrap();
        let mut state = hqr::initial_state_hqr(f0).unwrap();
        for op in ops {
            state = if op == 0 {
                hqr::ed_round_hqr(&state, &params).unwrap().state
            } else {
                hqr::es_level_hqr(&state, &params)
            };
            let sum: f64 = state.coeffs().iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn attempt_count_decreases_in_p(
        n in 0u32..=6,
        p in 0.01f64..0.9,
        delta in 0.01f64..0.09,
    ) {
        let lo = rates::zn(n, p).unwrap();
        let hi = rates::zn(n, p + delta).unwrap();
        prop_assert!(hi < lo);
        prop_assert!(hi >= 1.0);
    }

    #[test]
    fn rate_increases_with_link_and_swap_probabilities(
        p in 0.005f64..0.15,
        pe in 0.5f64..1.0,
    ) {
        let budget = LinkBudget::new(100.0, 0.17, 2e8).unwrap();
        let base = rates::probabilistic_rate(&budget, 2, p, &[], &[], &[pe, pe]).unwrap();
        let more_link = rates::probabilistic_rate(&budget, 2, p * 1.1, &[], &[], &[pe, pe]).unwrap();
        let more_swap =
            rates::probabilistic_rate(&budget, 2, p, &[], &[], &[pe.min(0.99) + 0.01, pe]).unwrap();
        prop_assert!(more_link.rate_hz > base.rate_hz);
        prop_assert!(more_swap.rate_hz > base.rate_hz);
    }

    #[test]
    fn recursion_equals_closed_product(
        p in 0.001f64..0.2,
        pes in proptest::collection::vec(0.3f64..1.0, 0..4),
    ) {
        let budget = LinkBudget::new(80.0, 0.17, 2e8).unwrap();
        let n = pes.len() as u32;
        let trace = rates::probabilistic_rate(&budget, n, p, &[], &[], &pes).unwrap();
        let mut want = p / budget.t0_s;
        for (pe, a) in pes.iter().zip(&trace.a_es) {
            want *= (2.0 / 3.0) * pe / a;
        }
        prop_assert!((trace.rate_hz - want).abs() < 1e-12 * want);
    }

    #[test]
    fn secret_fractions_never_negative(
        qx in 0.0f64..=1.0,
        qz in 0.0f64..=1.0,
        s in 0.0f64..=2.828,
    ) {
        prop_assert!(keyrate::secret_fraction_bb84(qx, qz) >= 0.0);
        prop_assert!(keyrate::secret_fraction_di(qz, s) >= 0.0);
    }

    #[test]
    fn keys_are_nonnegative_and_ordered(
        f0 in 0.8f64..=1.0,
        p_g in 0.95f64..=1.0,
        eta in 0.9f64..=1.0,
        n in 1u32..=3,
        k in 0u32..=2,
        hqr_setup in proptest::bool::ANY,
    ) {
        let (setup, l) = if hqr_setup { (Setup::Hqr, 300.0) } else { (Setup::Oqr, 600.0) };
        let cfg = RepeaterConfig::new(setup, l, n, k).unwrap();
        let hw = HardwareParams::new(p_g, eta, f0).unwrap();
        let rec = keyrate::key_rates(&cfg, &hw).unwrap();
        prop_assert!(rec.key_dd >= 0.0 && rec.key_di >= 0.0);
        prop_assert!(rec.key_dd >= rec.key_di - 1e-15);
        prop_assert!(rec.rate_rep >= 0.0);
    }

    #[test]
    fn closed_coefficients_match_iterated_swaps(
        p_g in 0.5f64..=1.0,
        n in 0u32..=4,
    ) {
        let mut state = BellDiagonalState::new([1.0, 0.0, 0.0, 0.0]).unwrap();
        for _ in 0..n {
            state = oqr::es_level_oqr(&state, p_g);
        }
        for (a, b) in state.coeffs().iter().zip(analytic::closed_coeffs(p_g, n).coeffs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
