//! Closed-form results for the gate-based setup with a pure source
//! (f0 = 1, k = 0) and the sensitivity toolbox built on them.
//!
//! With a pure source, n swap levels with gate quality p_G leave the chain in
//! the state c1 = (1+3p_G^n̄)/4, c_{i≥2} = (1−p_G^n̄)/4 with n̄ = 2^n − 1
//! intermediate stations. All observables, secret fractions and their partial
//! derivatives with respect to η_d, p_G and n then have closed forms; n is
//! extrapolated to a continuous variable only inside the derivatives.
//!
//! The derivative formulas differentiate the raw secret-fraction expressions;
//! the zero-clamp applied by [`closed_secret_fractions`] is ignored. Where a
//! formula genuinely diverges (artanh(1) at p_G = 1, or at the boundary of
//! the violation region) a signed infinity is returned rather than an error.

use crate::bell::{self, BellDiagonalState, CHSH_MAX};
use crate::error::{Error, Result};

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, SQRT_2};

/// Sensitivities of both secret fractions at one parameter point.
///
/// All six derivatives are finite whenever the CHSH condition holds strictly
/// (away from p_G = 1 for the DD gate derivative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityReport {
    pub d_eta_dd: f64,
    pub d_pg_dd: f64,
    pub d_n_dd: f64,
    pub d_eta_di: f64,
    pub d_pg_di: f64,
    pub d_n_di: f64,
    pub r_dd: f64,
    pub r_di: f64,
    /// Intermediate stations 2^n − 1.
    pub n_bar: u64,
}

/// Number of intermediate stations n̄ = 2^n − 1.
pub fn n_bar(n: u32) -> u64 {
    (1u64 << n) - 1
}

fn pow_nbar(p_g: f64, n: u32) -> f64 {
    p_g.powi(n_bar(n) as i32)
}

/// Final-state coefficients after n swap levels on a pure source.
pub fn closed_coeffs(p_g: f64, n: u32) -> BellDiagonalState {
    debug_assert!((0.0..=1.0).contains(&p_g));
    let y = pow_nbar(p_g, n);
    BellDiagonalState::new([
        (1.0 + 3.0 * y) / 4.0,
        (1.0 - y) / 4.0,
        (1.0 - y) / 4.0,
        (1.0 - y) / 4.0,
    ])
    .expect("closed-form coefficients are normalized by construction")
}

/// DD QBER, DI QBER and CHSH value of the closed-form state:
/// q_dd = (1−p^n̄)/2, q_z_di = (1−η²p^n̄)/2, s = 2√2·η²·p^n̄.
pub fn closed_observables(p_g: f64, eta_d: f64, n: u32) -> (f64, f64, f64) {
    let y = pow_nbar(p_g, n);
    let x = eta_d * eta_d * y;
    ((1.0 - y) / 2.0, (1.0 - x) / 2.0, CHSH_MAX * x)
}

/// CHSH violation condition S > 2, i.e. η_d²·p_G^n̄ > 1/√2.
pub fn chsh_condition(p_g: f64, eta_d: f64, n: u32) -> bool {
    eta_d * eta_d * pow_nbar(p_g, n) > FRAC_1_SQRT_2
}

/// Closed-form secret fractions, both clamped at zero. The DD fraction
/// carries the η_d² click factor here, so it is directly comparable to the
/// DI one.
pub fn closed_secret_fractions(p_g: f64, eta_d: f64, n: u32) -> (f64, f64) {
    let y = pow_nbar(p_g, n);
    let x = eta_d * eta_d * y;
    let r_dd = (eta_d * eta_d * (1.0 - 2.0 * bell::h((1.0 - y) / 2.0))).max(0.0);
    let r_di = if x > FRAC_1_SQRT_2 {
        let root = (2.0 * x * x - 1.0).sqrt();
        (1.0 - bell::h((1.0 - x) / 2.0) - bell::h(0.5 * (1.0 + root))).max(0.0)
    } else {
        0.0
    };
    (r_dd, r_di)
}

/// Area hyperbolic tangent (1/2)·ln((1+x)/(1−x)) on (−1, 1).
pub fn artanh(x: f64) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::domain("x", x, "(-1, 1)"));
    }
    Ok(x.atanh())
}

/// The common factor of the DI derivatives,
///
/// ```text
/// q = 2x/√(2x²−1) · artanh(√(2x²−1)) + artanh(x),   x = η_d²·p_G^n̄.
/// ```
///
/// Defined for 2x² − 1 > 0 (strict CHSH violation); diverges at x = 1 and
/// returns a flagged infinity there.
pub fn q_fn(eta_d: f64, p_g: f64, nb: u64) -> Result<f64> {
    let x = eta_d * eta_d * p_g.powi(nb as i32);
    let disc = 2.0 * x * x - 1.0;
    if disc <= 0.0 {
        return Err(Error::domain(
            "eta_d^2 * p_g^n_bar",
            x,
            "(1/sqrt(2), 1]; CHSH must be violated strictly",
        ));
    }
    if x >= 1.0 {
        return Ok(f64::INFINITY);
    }
    let root = disc.sqrt();
    Ok(2.0 * x / root * root.atanh() + x.atanh())
}

/// Partial derivatives (∂η, ∂p_G, ∂n) of the DD secret fraction
/// η²[1 − 2h((1−p^n̄)/2)], treating n as continuous.
pub fn derivatives_dd(eta_d: f64, p_g: f64, n: u32) -> (f64, f64, f64) {
    let nb = n_bar(n) as f64;
    let y = pow_nbar(p_g, n);
    let e2 = eta_d * eta_d;
    let d_eta = 2.0 * eta_d * (1.0 - 2.0 * bell::h((1.0 - y) / 2.0));
    if y == 0.0 {
        // fully depolarized: constant in p_G and n
        return (d_eta, 0.0, 0.0);
    }
    let d_pg = if nb == 0.0 {
        0.0
    } else if y >= 1.0 {
        f64::INFINITY // artanh(1)
    } else {
        2.0 * nb * e2 * p_g.powi(nb as i32 - 1) / LN_2 * y.atanh()
    };
    let d_n = if p_g >= 1.0 {
        0.0 // the fraction is constant along n at p_G = 1
    } else if y >= 1.0 {
        f64::NEG_INFINITY // n̄ = 0 with p_G < 1: entropy slope at zero error
    } else {
        2.0 * (nb + 1.0) * e2 * y * p_g.ln() * y.atanh()
    };
    (d_eta, d_pg, d_n)
}

/// Partial derivatives (∂η, ∂p_G, ∂n) of the DI secret fraction, valid only
/// under strict CHSH violation.
pub fn derivatives_di(eta_d: f64, p_g: f64, n: u32) -> Result<(f64, f64, f64)> {
    let nb = n_bar(n) as f64;
    let y = pow_nbar(p_g, n);
    let q = q_fn(eta_d, p_g, n_bar(n))?;
    let e2 = eta_d * eta_d;
    let d_eta = 2.0 * eta_d * y * q / LN_2;
    let d_pg = if nb == 0.0 {
        0.0
    } else if q.is_infinite() {
        f64::INFINITY
    } else {
        nb * e2 * p_g.powi(nb as i32 - 1) * q / LN_2
    };
    let d_n = if p_g >= 1.0 {
        0.0
    } else {
        (nb + 1.0) * e2 * y * p_g.ln() * q
    };
    Ok((d_eta, d_pg, d_n))
}

/// Limit of η_d·∂η r_DI as the parameters approach the violation threshold:
/// √2/ln2 · (artanh(1/√2) + √2). Every point inside the region exceeds it,
/// and it exceeds the global bound 2 on the DD analogue.
pub fn di_eta_impact_threshold_limit() -> f64 {
    SQRT_2 / LN_2 * (FRAC_1_SQRT_2.atanh() + SQRT_2)
}

/// Bundles fractions and all six derivatives for one parameter point with
/// n ≥ 1 inside the violation region.
pub fn sensitivity_report(eta_d: f64, p_g: f64, n: u32) -> Result<SensitivityReport> {
    if n == 0 {
        return Err(Error::domain("n", 0.0, "[1, 20]"));
    }
    let (d_eta_di, d_pg_di, d_n_di) = derivatives_di(eta_d, p_g, n)?;
    let (d_eta_dd, d_pg_dd, d_n_dd) = derivatives_dd(eta_d, p_g, n);
    let (r_dd, r_di) = closed_secret_fractions(p_g, eta_d, n);
    Ok(SensitivityReport {
        d_eta_dd,
        d_pg_dd,
        d_n_dd,
        d_eta_di,
        d_pg_di,
        d_n_di,
        r_dd,
        r_di,
        n_bar: n_bar(n),
    })
}
