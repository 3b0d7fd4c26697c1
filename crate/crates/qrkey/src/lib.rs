//! Secret-key-rate analysis for nested quantum repeaters.
//!
//! The library evolves Bell-diagonal states through noisy entanglement
//! distillation and swapping for two repeater realizations — the gate-based
//! original protocol (OQR) and the hybrid protocol (HQR) — and computes the
//! repeater rate together with device-dependent (BB84) and
//! device-independent (CHSH-certified) secret key rates.
//!
//! Layout:
//! - [`bell`]: Bell-diagonal states, QBERs, detector substitution, CHSH.
//! - [`oqr`] / [`hqr`]: per-setup initial states and the closed-form
//!   distillation/swap coefficient transforms.
//! - [`rates`]: transmittivity, waiting-time combinatorics and repeater
//!   rates for deterministic and probabilistic swapping.
//! - [`keyrate`]: the end-to-end pipeline producing [`keyrate::RateRecord`].
//! - [`analytic`]: pure-source closed forms and parameter sensitivities.
//! - [`oracle`]: independent ground truth (density-matrix circuit
//!   simulation, operator-level CHSH, Monte Carlo waiting times).

pub mod analytic;
pub mod bell;
pub mod error;
pub mod hqr;
pub mod keyrate;
pub mod oqr;
pub mod oracle;
pub mod rates;

pub use error::{Error, Result};
