//! Bell-diagonal state algebra and the observables derived from it.
//!
//! A two-qubit state that is diagonal in the Bell basis
//! {|φ1⟩, |φ2⟩, |φ3⟩, |φ4⟩} with
//!
//! ```text
//! |φ1,2⟩ = (|00⟩ ± |11⟩)/√2,   |φ3,4⟩ = (|01⟩ ± |10⟩)/√2
//! ```
//!
//! is fully described by four probabilities `c1..c4`. Every distillation and
//! swapping step in this crate maps Bell-diagonal states to Bell-diagonal
//! states, so this four-vector is the state that flows through the whole
//! pipeline. The fixed coefficient ordering (φ1, φ2, φ3, φ4) is shared by all
//! modules.

use crate::error::{Error, Result};

/// Tolerance for clamping slightly negative coefficients to zero.
pub const COEFF_TOL: f64 = 1e-12;

/// Tolerance on the coefficient sum.
pub const NORM_TOL: f64 = 1e-9;

/// Tsirelson bound, the largest CHSH value quantum mechanics allows.
pub const CHSH_MAX: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Weights of the four Bell states |φ1⟩..|φ4⟩ in a Bell-diagonal state.
///
/// Invariants enforced on construction: every coefficient is ≥ 0 after
/// clamping drift within [`COEFF_TOL`], and the four coefficients sum to 1
/// within [`NORM_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState {
    c: [f64; 4],
}

impl BellDiagonalState {
    /// Validates and builds a state from raw coefficients.
    ///
    /// Coefficients within [`COEFF_TOL`] below zero are clamped to zero;
    /// larger violations and normalization failures are hard errors.
    pub fn new(coeffs: [f64; 4]) -> Result<Self> {
        let mut c = coeffs;
        for (i, ci) in c.iter_mut().enumerate() {
            if *ci < 0.0 {
                if *ci < -COEFF_TOL {
                    return Err(Error::NegativeCoefficient {
                        index: i + 1,
                        value: *ci,
                    });
                }
                *ci = 0.0;
            }
        }
        let sum: f64 = c.iter().sum();
        if (sum - 1.0).abs() > NORM_TOL {
            return Err(Error::Unnormalized { sum });
        }
        Ok(Self { c })
    }

    pub fn coeffs(&self) -> [f64; 4] {
        self.c
    }

    pub fn c1(&self) -> f64 {
        self.c[0]
    }

    pub fn c2(&self) -> f64 {
        self.c[1]
    }

    pub fn c3(&self) -> f64 {
        self.c[2]
    }

    pub fn c4(&self) -> f64 {
        self.c[3]
    }

    /// Fidelity with respect to |φ1⟩, i.e. the first Bell coefficient.
    pub fn fidelity(&self) -> f64 {
        self.c[0]
    }

    /// CHSH value 2√2·(c1 − c4) for the optimal measurement settings.
    pub fn chsh(&self) -> f64 {
        CHSH_MAX * (self.c[0] - self.c[3])
    }
}

/// DI observables of a state measured with imperfect detectors: the QBER of
/// the key-generating setting and the CHSH value, both with no-detection
/// events replaced by uniformly random outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiObservables {
    pub q_z: f64,
    pub s: f64,
}

/// Binary entropy h(p) = −p·log2(p) − (1−p)·log2(1−p) with h(0) = h(1) = 0.
///
/// Inputs outside [0, 1] by more than 1e-12 are domain errors; drift within
/// that tolerance is clamped to the endpoint.
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-COEFF_TOL..=1.0 + COEFF_TOL).contains(&p) {
        return Err(Error::domain("p", p, "[0, 1]"));
    }
    Ok(h(p.clamp(0.0, 1.0)))
}

/// Unchecked binary entropy; endpoints return 0 by the continuity convention.
pub(crate) fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

/// QBERs (q_x, q_z) of a Bell-diagonal state for X- and Z-basis measurements:
/// q_x = c2 + c4 and q_z = c3 + c4.
pub fn qber_xz(state: &BellDiagonalState) -> (f64, f64) {
    let [_, c2, c3, c4] = state.coeffs();
    (c2 + c4, c3 + c4)
}

/// Mixes the state with white noise to model detector efficiency η_d in the
/// DI scenario: each ci ↦ η_d²·ci + (1−η_d²)/4.
///
/// Replacing no-detection events by uniformly random outcomes is equivalent
/// to this substitution on the shared state; η_d enters quadratically since
/// both parties detect.
pub fn apply_detector_noise(state: &BellDiagonalState, eta_d: f64) -> Result<BellDiagonalState> {
    if !(0.0..=1.0).contains(&eta_d) {
        return Err(Error::domain("eta_d", eta_d, "[0, 1]"));
    }
    let e2 = eta_d * eta_d;
    let w = (1.0 - e2) / 4.0;
    let c = state.coeffs().map(|ci| e2 * ci + w);
    BellDiagonalState::new(c)
}

/// DI observables q_z and S of the state after the detector substitution:
/// q_z = η_d²(c3+c4) + (1−η_d²)/2 and S = 2√2·η_d²·(c1−c4).
pub fn di_observables(state: &BellDiagonalState, eta_d: f64) -> Result<DiObservables> {
    if !(0.0..=1.0).contains(&eta_d) {
        return Err(Error::domain("eta_d", eta_d, "[0, 1]"));
    }
    let e2 = eta_d * eta_d;
    let [c1, _, c3, c4] = state.coeffs();
    Ok(DiObservables {
        q_z: e2 * (c3 + c4) + (1.0 - e2) / 2.0,
        s: CHSH_MAX * e2 * (c1 - c4),
    })
}
