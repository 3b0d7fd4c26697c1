//! State preparation and coefficient transforms for the hybrid repeater,
//! where qubit-light interaction generates entanglement conditioned on an
//! unambiguous state discrimination (USD) measurement, and two-qubit gates
//! are dissipative controlled-Z operations.
//!
//! The gate error channel applies Z errors independently to both qubits
//! before the ideal controlled-Z; `p_c` is the per-qubit no-Z-error
//! probability derived from the local transmission parameter `p_g`. Swapping
//! is deterministic here; detector efficiency enters only the link
//! probability [`p0_hqr`] and the final key measurements.

use crate::bell::BellDiagonalState;
use crate::error::{Error, Result};
use crate::oqr::EdOutcome;

/// Dissipative gate-error parameters.
///
/// `p_bar = 2·p_c·(p_c − 1) ∈ [−1/2, 0]` is the combination in which `p_c`
/// enters the distillation transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HqrGateParams {
    p_g: f64,
    p_c: f64,
    p_bar: f64,
}

impl HqrGateParams {
    /// Builds the parameters from the local transmission parameter `p_g`,
    /// with p_c = (1 + exp(−π(1−p_g²)/(2√p_g(1+p_g))))/2.
    ///
    /// The exponent is singular at p_g = 0, so the domain is (0, 1].
    pub fn from_gate_quality(p_g: f64) -> Result<Self> {
        if !(p_g > 0.0 && p_g <= 1.0) {
            return Err(Error::domain("p_g", p_g, "(0, 1]"));
        }
        let exponent = -std::f64::consts::PI * (1.0 - p_g * p_g)
            / (2.0 * p_g.sqrt() * (1.0 + p_g));
        let p_c = 0.5 * (1.0 + exponent.exp());
        Ok(Self {
            p_g,
            p_c,
            p_bar: 2.0 * p_c * (p_c - 1.0),
        })
    }

    /// Builds the parameters from the no-Z-error probability directly,
    /// recovering `p_g` by bisection of the strictly increasing map
    /// p_g ↦ p_c(p_g). Domain (1/2, 1]; p_c = 1/2 is the p_g → 0 limit.
    pub fn from_no_flip(p_c: f64) -> Result<Self> {
        if !(p_c > 0.5 && p_c <= 1.0) {
            return Err(Error::domain("p_c", p_c, "(1/2, 1]"));
        }
        if p_c == 1.0 {
            return Self::from_gate_quality(1.0);
        }
        let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if Self::from_gate_quality(mid)?.p_c < p_c {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let p_g = 0.5 * (lo + hi);
        Ok(Self {
            p_g,
            p_c,
            p_bar: 2.0 * p_c * (p_c - 1.0),
        })
    }

    pub fn p_g(&self) -> f64 {
        self.p_g
    }

    pub fn p_c(&self) -> f64 {
        self.p_c
    }

    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }
}

/// No-Z-error probability for a gate of local transmission `p_g`.
pub fn p_no_flip(p_g: f64) -> Result<HqrGateParams> {
    HqrGateParams::from_gate_quality(p_g)
}

/// USD-generated initial state (f0, 1−f0, 0, 0).
pub fn initial_state_hqr(f0: f64) -> Result<BellDiagonalState> {
    if !(0.0..=1.0).contains(&f0) {
        return Err(Error::domain("f0", f0, "[0, 1]"));
    }
    BellDiagonalState::new([f0, 1.0 - f0, 0.0, 0.0])
}

/// One distillation round under the dissipative gate model.
///
/// Success probability: (c1+c4)² + (c2+c3)² + p̄(2c1+2c4−1)², which equals
/// 1/2 + (1/2 + p̄)(2c1+2c4−1)² and is therefore bounded below by 1/2 for
/// p̄ ≥ −1/2.
pub fn ed_round_hqr(state: &BellDiagonalState, params: &HqrGateParams) -> Result<EdOutcome> {
    let [c1, c2, c3, c4] = state.coeffs();
    let pb = params.p_bar;
    let w = (2.0 * c1 + 2.0 * c4 - 1.0).powi(2);
    let p_success = (c1 + c4).powi(2) + (c2 + c3).powi(2) + pb * w;
    if p_success <= 1e-15 {
        return Err(Error::Degenerate {
            context: "ed_round_hqr",
            value: p_success,
        });
    }
    debug_assert!(p_success >= 0.5 - 1e-12);
    let pb1 = pb + 1.0;
    let n1 = pb * pb * (c1 - c4) * (c1 - c4 + c2 - c3)
        + pb * (c1 * c1 + c4 * c4 + (c1 - c4).powi(2) - c1 * c3 - c2 * c4)
        + c1 * c1
        + c4 * c4;
    let n2 = pb * pb * (c1 * c3 + (c2 - c3 - c4) * c4) - pb * (c3 + c4) * c4
        + 2.0 * pb1 * pb1 * c1 * c4
        - pb * pb1 * c1 * (c1 + c2);
    let n3 = pb * pb * (c1 * c2 + c3 * c4) + pb1 * pb1 * (c2 * c2 + c3 * c3)
        - pb * pb1 * (c2 * (c3 + c4) + (c1 + c2) * c3);
    let n4 = pb * pb * (c2 * c4 + (c1 - c3 - c4) * c3) - pb * c3 * (c3 + c4)
        + 2.0 * pb1 * pb1 * c2 * c3
        - pb * pb1 * (c1 + c2) * c2;
    Ok(EdOutcome {
        state: BellDiagonalState::new([
            n1 / p_success,
            n2 / p_success,
            n3 / p_success,
            n4 / p_success,
        ])?,
        p_success,
    })
}

/// One (deterministic) swap level under the dissipative gate model.
pub fn es_level_hqr(state: &BellDiagonalState, params: &HqrGateParams) -> BellDiagonalState {
    let [c1, c2, c3, c4] = state.coeffs();
    let pc = params.p_c;
    let w = (2.0 * c1 + 2.0 * c4 - 1.0).powi(2);
    let sq = c1 * c1 + c2 * c2 + c3 * c3 + c4 * c4;
    let cross = 2.0 * (c1 - c4) * (c2 - c3);
    let c = [
        2.0 * (c1 * c4 + c2 * c3)
            + 2.0 * pc * (c1 * (1.0 - c1 - 3.0 * c4) - c2 * (c3 - c4) - (c2 - c4) * c3)
            + pc * pc * w,
        2.0 * (c1 * c3 + c2 * c4) + pc * (w + cross) - pc * pc * w,
        2.0 * (c1 * c2 + c3 * c4) + pc * (w - cross) - pc * pc * w,
        sq - 2.0 * pc * (sq - (c1 + c4) * (c2 + c3)) + pc * pc * w,
    ];
    BellDiagonalState::new(c).expect("swap output is normalized by construction")
}

/// Probability that the USD measurement links two adjacent stations:
/// P0 = 1 − (2f0−1)^{η_t·η_d / (1 + η_t(1−2η_d))}.
///
/// Vanishes for pure sources (f0 = 1) and reaches 1 at f0 = 1/2. A
/// non-positive exponent denominator is flagged instead of being evaluated.
pub fn p0_hqr(f0: f64, eta_t: f64, eta_d: f64) -> Result<f64> {
    if !(0.5..=1.0).contains(&f0) {
        return Err(Error::domain("f0", f0, "[0.5, 1]"));
    }
    if !(eta_t > 0.0 && eta_t <= 1.0) {
        return Err(Error::domain("eta_t", eta_t, "(0, 1]"));
    }
    if !(eta_d > 0.0 && eta_d <= 1.0) {
        return Err(Error::domain("eta_d", eta_d, "(0, 1]"));
    }
    let denom = 1.0 + eta_t * (1.0 - 2.0 * eta_d);
    if denom <= 0.0 {
        return Err(Error::domain(
            "eta_t*(2*eta_d-1)",
            eta_t * (2.0 * eta_d - 1.0),
            "(-inf, 1); the USD exponent denominator must stay positive",
        ));
    }
    let exponent = eta_t * eta_d / denom;
    Ok(1.0 - (2.0 * f0 - 1.0).powf(exponent))
}
