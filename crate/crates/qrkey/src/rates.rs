//! Transmission, timing, waiting-time combinatorics and repeater rates.
//!
//! The central quantity is Z_n(p), the expected number of attempts until all
//! 2^n segments of the chain hold an entangled pair, each attempt succeeding
//! with probability p:
//!
//! ```text
//! Z_n(p) = Σ_{j=1}^{2^n} C(2^n, j) (−1)^{j+1} / (1 − (1−p)^j)
//! ```
//!
//! The alternating sum cancels catastrophically for small p, so the
//! implementation falls back to the equivalent tail-sum
//! Z_n(p) = Σ_{m≥0} [1 − (1−(1−p)^m)^{2^n}] (all terms positive and
//! decreasing) whenever the direct form cannot deliver twelve significant
//! digits, and always for 2^n > 64.
//!
//! Probabilistic swapping uses the per-level recursion
//! ⟨n_i⟩ = ⟨ñ_{i−1}⟩ / P_ES^(i), ⟨ñ_i⟩ = (3/2)·a^(i)·⟨n_i⟩ with the exact
//! correction constants a(P) = (1−2P/3)/(1−P/2), one per level, never a
//! shared constant and never the small-p shortcut 3/(2P).

use crate::error::{Error, Result};

/// Practical cap on nesting levels for the attempt-count series.
pub const MAX_NESTING: u32 = 20;

/// Relative tail at which the stable series truncates.
const TAIL_REL: f64 = 1e-12;

/// Smallest per-attempt probability the stable series accepts for n ≥ 1.
const MIN_SERIES_P: f64 = 1e-6;

/// Fiber segment budget: length, attenuation, signal speed and the derived
/// transmittivity and heralding time.
///
/// Lengths are km, times seconds, rates Hz; conversions happen only here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub l0_km: f64,
    pub alpha_db_per_km: f64,
    pub c_fiber_m_per_s: f64,
    /// Round-trip heralding time 2·L0/c in seconds.
    pub t0_s: f64,
    /// Fiber transmittivity 10^(−α·L0/10).
    pub eta_t: f64,
}

impl LinkBudget {
    pub fn new(l0_km: f64, alpha_db_per_km: f64, c_fiber_m_per_s: f64) -> Result<Self> {
        let eta_t = transmittivity(l0_km, alpha_db_per_km)?;
        if c_fiber_m_per_s.is_nan() || c_fiber_m_per_s <= 0.0 {
            return Err(Error::domain("c_fiber", c_fiber_m_per_s, "(0, inf)"));
        }
        if l0_km.is_nan() || l0_km <= 0.0 {
            return Err(Error::domain("l0", l0_km, "(0, inf)"));
        }
        Ok(Self {
            l0_km,
            alpha_db_per_km,
            c_fiber_m_per_s,
            t0_s: 2.0 * l0_km * 1e3 / c_fiber_m_per_s,
            eta_t,
        })
    }
}

/// Full output of a repeater-rate evaluation: every probability and
/// correction constant that entered the product, plus the rate itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTrace {
    /// Link probability at nesting level 0 (after distillation, if any).
    pub p0: f64,
    /// Per-round distillation success probabilities as consumed by the
    /// level-0 recursion, detector-scaled where applicable (length k).
    pub p_ed: Vec<f64>,
    /// Per-level swap success probabilities (length n).
    pub p_es: Vec<f64>,
    /// Correction constants consumed by the distillation product (length k).
    pub a_ed: Vec<f64>,
    /// Correction constants consumed by the swap product (length n).
    pub a_es: Vec<f64>,
    pub rate_hz: f64,
    /// Set when p0 exceeds 0.2, where the small-p approximation degrades.
    pub regime_warning: bool,
}

/// Fiber transmittivity 10^(−α·l0/10) for a segment of `l0_km` kilometers.
pub fn transmittivity(l0_km: f64, alpha_db_per_km: f64) -> Result<f64> {
    if l0_km.is_nan() || l0_km < 0.0 {
        return Err(Error::domain("l0", l0_km, "[0, inf)"));
    }
    if alpha_db_per_km.is_nan() || alpha_db_per_km <= 0.0 {
        return Err(Error::domain("alpha", alpha_db_per_km, "(0, inf)"));
    }
    Ok(10f64.powf(-alpha_db_per_km * l0_km / 10.0))
}

/// Expected number of attempts to fill all 2^n segments, each succeeding
/// with probability `p` per attempt.
pub fn zn(n: u32, p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain("p", p, "(0, 1]"));
    }
    if n > MAX_NESTING {
        return Err(Error::domain("n", n as f64, "[0, 20]"));
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    if n == 0 {
        return Ok(1.0 / p);
    }
    let m = 1u64 << n;
    if m <= 64 {
        if let Some(v) = zn_alternating(m, p) {
            return Ok(v);
        }
    }
    zn_tail_sum(m, p, n)
}

/// Direct alternating binomial sum with compensated summation. Returns None
/// when cancellation would leave fewer than twelve significant digits.
fn zn_alternating(m: u64, p: f64) -> Option<f64> {
    let log_q = (-p).ln_1p();
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut max_term = 0.0f64;
    let mut binom = 1.0f64;
    for j in 1..=m {
        binom *= (m - j + 1) as f64 / j as f64;
        let denom = -(((j as f64) * log_q).exp_m1()); // 1 − (1−p)^j
        let term = if j % 2 == 1 { binom / denom } else { -binom / denom };
        max_term = max_term.max(term.abs());
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    if max_term * f64::EPSILON > sum.abs() * TAIL_REL {
        None
    } else {
        Some(sum)
    }
}

/// Stable survival-sum form: Z_n(p) = Σ_{m≥0} [1 − (1−q^m)^{2^n}], q = 1−p,
/// truncated once the analytic geometric tail drops below `TAIL_REL`.
fn zn_tail_sum(m: u64, p: f64, n: u32) -> Result<f64> {
    if p < MIN_SERIES_P {
        return Err(Error::SeriesPrecision { n, p });
    }
    let q = 1.0 - p;
    let mf = m as f64;
    let mut total = 0.0f64;
    let mut u = 1.0f64; // q^slot
    loop {
        // 1 − (1−u)^m, evaluated without cancellation
        let term = if u >= 1.0 {
            1.0
        } else {
            -(mf * (-u).ln_1p()).exp_m1()
        };
        total += term;
        u *= q;
        let tail_bound = mf * u / p; // Σ over remaining slots is below m·q^{slot}/p
        if tail_bound < TAIL_REL * total {
            return Ok(total + tail_bound);
        }
    }
}

/// Correction constant a(p) = (1 − 2p/3)/(1 − p/2) of the waiting-time
/// recursion; approaches 1 as p → 0 and 2/3 at p = 1.
pub fn a_constant(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain("p", p, "(0, 1]"));
    }
    Ok((1.0 - 2.0 * p / 3.0) / (1.0 - p / 2.0))
}

/// Folds `k` distillation rounds into the level-0 link probability by
/// iterating P^(j) = P_ED^(j) / Z_1(P^(j−1)) from P^(0) = p0.
///
/// Returns the distilled probability and the correction constants
/// a(P^(0)), …, a(P^(k−1)) consumed by the equivalent product form.
pub fn distilled_link_probability(p0: f64, p_ed: &[f64]) -> Result<(f64, Vec<f64>)> {
    if !(p0 > 0.0 && p0 <= 1.0) {
        return Err(Error::domain("p0", p0, "(0, 1]"));
    }
    let mut p = p0;
    let mut a_ed = Vec::with_capacity(p_ed.len());
    for &pe in p_ed {
        if !(pe > 0.0 && pe <= 1.0) {
            return Err(Error::domain("p_ed", pe, "(0, 1]"));
        }
        a_ed.push(a_constant(p)?);
        p = pe / zn(1, p)?;
    }
    Ok((p, a_ed))
}

/// Repeater rate 1/(T0 · Z_n(p_l0)) for deterministic swapping.
pub fn deterministic_rate(budget: &LinkBudget, n: u32, p_l0: f64) -> Result<f64> {
    Ok(1.0 / (budget.t0_s * zn(n, p_l0)?))
}

/// Repeater rate for probabilistic swapping via the per-level recursion.
///
/// `p_l0` is the (possibly distilled) level-0 link probability; `p_ed` and
/// `a_ed` are recorded in the trace unchanged. The returned rate equals the
/// closed product (1/T0)·(2/3)^n·p_l0·∏ P_ES^(i)/a_ES^(i−1) to machine
/// precision, since the recursion telescopes into exactly that product.
pub fn probabilistic_rate(
    budget: &LinkBudget,
    n: u32,
    p_l0: f64,
    a_ed: &[f64],
    p_ed: &[f64],
    p_es: &[f64],
) -> Result<RateTrace> {
    if !(p_l0 > 0.0 && p_l0 <= 1.0) {
        return Err(Error::domain("p_l0", p_l0, "(0, 1]"));
    }
    if p_es.len() != n as usize {
        return Err(Error::domain("p_es.len", p_es.len() as f64, "exactly n entries"));
    }
    let mut mean_attempts = 1.0 / p_l0; // ⟨n_0⟩
    let mut p_level = p_l0;
    let mut a_es = Vec::with_capacity(n as usize);
    for &pe in p_es {
        if !(pe > 0.0 && pe <= 1.0) {
            return Err(Error::domain("p_es", pe, "(0, 1]"));
        }
        let a = a_constant(p_level)?;
        a_es.push(a);
        mean_attempts = 1.5 * a * mean_attempts / pe;
        p_level = 1.0 / mean_attempts;
    }
    Ok(RateTrace {
        p0: p_l0,
        p_ed: p_ed.to_vec(),
        p_es: p_es.to_vec(),
        a_ed: a_ed.to_vec(),
        a_es,
        rate_hz: 1.0 / (budget.t0_s * mean_attempts),
        regime_warning: p_l0 > 0.2,
    })
}

/// Repeater rate for the gate-based setup with imperfect detectors:
///
/// ```text
/// R = (1/T0) (2/3)^(k+n) η_d^(2(k+n)) η_t(L0) ∏ 1/a_ES^(i−1) ∏ P'_ED^(j)/a_ED^(j−1)
/// ```
///
/// assembled from the recursion with P_ED^(j) = η_d²·P'_ED^(j) and
/// P_ES = η_d² at every level; `p_ed_prime` are the gate-only distillation
/// probabilities.
pub fn oqr_probabilistic_rate(
    budget: &LinkBudget,
    n: u32,
    k: u32,
    eta_d: f64,
    p_ed_prime: &[f64],
) -> Result<RateTrace> {
    if !(eta_d > 0.0 && eta_d < 1.0) {
        return Err(Error::domain("eta_d", eta_d, "(0, 1)"));
    }
    if p_ed_prime.len() != k as usize {
        return Err(Error::domain(
            "p_ed_prime.len",
            p_ed_prime.len() as f64,
            "exactly k entries",
        ));
    }
    let e2 = eta_d * eta_d;
    let p_ed: Vec<f64> = p_ed_prime.iter().map(|p| e2 * p).collect();
    let (p_l0, a_ed) = distilled_link_probability(budget.eta_t, &p_ed)?;
    let p_es = vec![e2; n as usize];
    let mut trace = probabilistic_rate(budget, n, p_l0, &a_ed, &p_ed, &p_es)?;
    trace.p0 = budget.eta_t;
    Ok(trace)
}
