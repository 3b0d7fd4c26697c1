//! State preparation and coefficient transforms for the original (gate-based)
//! repeater, whose noisy two-qubit gates follow the depolarizing model
//!
//! ```text
//! O(χ) = p_G · O_ideal(χ) + (1 − p_G)/4 · 𝟙
//! ```
//!
//! Distillation uses two such gates per round (p_G² in the transform),
//! swapping uses one (p_G). The closed forms below are what the explicit
//! circuit produces on Bell-diagonal inputs; the oracle module re-derives
//! them independently by density-matrix simulation.
//!
//! The chain is homogeneous: every segment carries the same coefficients, so
//! a swap level takes a single state for both input pairs.

use crate::bell::BellDiagonalState;
use crate::error::{Error, Result};

/// Result of one distillation round: the surviving pair and the gate-only
/// success probability (detector factors excluded).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdOutcome {
    pub state: BellDiagonalState,
    pub p_success: f64,
}

/// Werner state of fidelity `f0`: (f0, (1−f0)/3, (1−f0)/3, (1−f0)/3).
///
/// `f0` below 1/4 would need a negative white-noise weight, hence the domain
/// [0.25, 1].
pub fn initial_state_oqr(f0: f64) -> Result<BellDiagonalState> {
    if !(0.25..=1.0).contains(&f0) {
        return Err(Error::domain("f0", f0, "[0.25, 1]"));
    }
    let rest = (1.0 - f0) / 3.0;
    BellDiagonalState::new([f0, rest, rest, rest])
}

/// One distillation round on two identical copies with gate quality `p_g`.
///
/// The success probability (1 + p_G²(2c1+2c4−1)²)/2 is bounded below by 1/2,
/// so the degenerate branch cannot fire for valid inputs; it is kept as a
/// hard check.
pub fn ed_round_oqr(state: &BellDiagonalState, p_g: f64) -> Result<EdOutcome> {
    if !(0.0..=1.0).contains(&p_g) {
        return Err(Error::domain("p_g", p_g, "[0, 1]"));
    }
    let [c1, c2, c3, c4] = state.coeffs();
    let p2 = p_g * p_g;
    let p_success = 0.5 * (1.0 + p2 * (2.0 * c1 + 2.0 * c4 - 1.0).powi(2));
    if p_success <= 1e-15 {
        return Err(Error::Degenerate {
            context: "ed_round_oqr",
            value: p_success,
        });
    }
    debug_assert!(p_success >= 0.5 - 1e-12);
    let norm = 8.0 * p_success;
    let c = [
        (1.0 + p2 * (8.0 * c1 * c1 + 8.0 * c4 * c4 - 1.0)) / norm,
        (1.0 - p2 * (1.0 - 16.0 * c1 * c4)) / norm,
        (1.0 + p2 * (8.0 * c2 * c2 + 8.0 * c3 * c3 - 1.0)) / norm,
        (1.0 - p2 * (1.0 - 16.0 * c2 * c3)) / norm,
    ];
    Ok(EdOutcome {
        state: BellDiagonalState::new(c)?,
        p_success,
    })
}

/// One swap level on a homogeneous chain: both input pairs carry `state`,
/// the Bell measurement uses one noisy gate of quality `p_g`.
pub fn es_level_oqr(state: &BellDiagonalState, p_g: f64) -> BellDiagonalState {
    debug_assert!((0.0..=1.0).contains(&p_g));
    let [c1, c2, c3, c4] = state.coeffs();
    let w = (1.0 - p_g) / 4.0;
    let c = [
        w + p_g * (c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4),
        w + 2.0 * p_g * (c1 * c2 + c3 * c4),
        w + 2.0 * p_g * (c1 * c3 + c2 * c4),
        w + 2.0 * p_g * (c1 * c4 + c2 * c3),
    ];
    BellDiagonalState::new(c).expect("swap output is normalized by construction")
}

/// Success probability of the swap's twofold detection, η_d², neglecting
/// dark counts.
pub fn es_success_oqr(eta_d: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta_d) {
        return Err(Error::domain("eta_d", eta_d, "[0, 1]"));
    }
    Ok(eta_d * eta_d)
}
