//! Circuit-level simulation of the distillation and swapping protocols.
//!
//! Distillation (two pairs, qubits ordered a1, b1, a2, b2):
//! Alice rotates her qubits by +π/2 around X, Bob his by −π/2; both apply a
//! noisy CNOT from the kept pair onto the sacrificed pair; the sacrificed
//! pair is measured in the computational basis and the kept pair survives
//! when the outcomes coincide.
//!
//! Swapping (pairs a–b and c–d): a noisy CNOT b→c, an X-basis measurement on
//! b and a computational one on c, and the outcome-conditioned Pauli
//! correction {I, X, Z, XZ} on d.
//!
//! Both noise models plug into the same circuits. The depolarizing model
//! mixes the gate output with white noise on the gate's qubits. The
//! dissipative model applies Z errors to both qubits followed by an ideal
//! controlled-Z; its CNOT is realized as H_target · CZ · H_target with the
//! (perfect) Hadamards absorbing no noise. That realization reproduces the
//! dissipative swap transform with the standard correction table — no extra
//! Bell-label permutation is needed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dm::{
    c, conjugate, embed_one, embed_pair_with_rest, embed_two, partial_trace, DensityMatrix,
};
use crate::error::{Error, Result};

/// Gate-noise model applied to every two-qubit gate in a circuit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateModel {
    /// O(χ) = p_g·O_ideal(χ) + (1−p_g)/4 · 𝟙 on the gate's qubits.
    Depolarizing { p_g: f64 },
    /// Independent Z errors (no-error probability p_c per qubit) before an
    /// ideal controlled-Z.
    Dissipative { p_c: f64 },
}

impl GateModel {
    fn validate(&self) -> Result<()> {
        match *self {
            GateModel::Depolarizing { p_g } => {
                if !(0.0..=1.0).contains(&p_g) {
                    return Err(Error::domain("p_g", p_g, "[0, 1]"));
                }
            }
            GateModel::Dissipative { p_c } => {
                if !(0.5..=1.0).contains(&p_c) {
                    return Err(Error::domain("p_c", p_c, "[1/2, 1]"));
                }
            }
        }
        Ok(())
    }
}

/// A two-qubit unitary together with the register positions it acts on;
/// `qubits.0` is the more significant bit of the gate's own basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp {
    pub unitary: DMatrix<Complex64>,
    pub qubits: (usize, usize),
}

impl GateOp {
    pub fn cnot(control: usize, target: usize) -> Self {
        GateOp {
            unitary: cnot_matrix(),
            qubits: (control, target),
        }
    }

    pub fn cz(a: usize, b: usize) -> Self {
        GateOp {
            unitary: cz_matrix(),
            qubits: (a, b),
        }
    }
}

fn cnot_matrix() -> DMatrix<Complex64> {
    let one = c(1.0, 0.0);
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = one;
    m[(1, 1)] = one;
    m[(2, 3)] = one;
    m[(3, 2)] = one;
    m
}

fn cz_matrix() -> DMatrix<Complex64> {
    let mut m = DMatrix::identity(4, 4);
    m[(3, 3)] = c(-1.0, 0.0);
    m
}

const PAULI_X: [[Complex64; 2]; 2] = [
    [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
];

const PAULI_Z: [[Complex64; 2]; 2] = [
    [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
    [Complex64::new(0.0, 0.0), Complex64::new(-1.0, 0.0)],
];

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

const HADAMARD: [[Complex64; 2]; 2] = [
    [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(FRAC_1_SQRT_2, 0.0),
    ],
    [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(-FRAC_1_SQRT_2, 0.0),
    ],
];

/// exp(−iθX/2) = cos(θ/2)·I − i·sin(θ/2)·X.
fn rx(theta: f64) -> [[Complex64; 2]; 2] {
    let cos = c((theta / 2.0).cos(), 0.0);
    let msin = c(0.0, -(theta / 2.0).sin());
    [[cos, msin], [msin, cos]]
}

/// |b⟩⟨b| for the computational basis.
fn z_projector(outcome: usize) -> [[Complex64; 2]; 2] {
    let mut p = [[c(0.0, 0.0); 2]; 2];
    p[outcome][outcome] = c(1.0, 0.0);
    p
}

/// |±⟩⟨±| for the X basis (outcome 0 = +).
fn x_projector(outcome: usize) -> [[Complex64; 2]; 2] {
    let sign = if outcome == 0 { 1.0 } else { -1.0 };
    let half = c(0.5, 0.0);
    let off = c(0.5 * sign, 0.0);
    [[half, off], [off, half]]
}

/// Depolarizing application of an ideal gate:
/// p_g·UχU† + (1−p_g)/4 · 𝟙 on the gate's qubits, with the state of the
/// remaining qubits preserved through the partial trace.
pub fn apply_depolarizing_gate(
    chi: &DensityMatrix,
    p_g: f64,
    gate: &GateOp,
) -> Result<DensityMatrix> {
    GateModel::Depolarizing { p_g }.validate()?;
    let n = chi.n_qubits();
    let (q0, q1) = gate.qubits;
    if q0 >= n || q1 >= n || q0 == q1 {
        return Err(Error::InvalidDensityMatrix("gate qubits out of range"));
    }
    Ok(DensityMatrix::from_raw_unchecked(depolarize_raw(
        chi.matrix(),
        p_g,
        &gate.unitary,
        q0,
        q1,
        n,
    )))
}

fn depolarize_raw(
    rho: &DMatrix<Complex64>,
    p_g: f64,
    unitary: &DMatrix<Complex64>,
    q0: usize,
    q1: usize,
    n: usize,
) -> DMatrix<Complex64> {
    let u = embed_two(unitary, q0, q1, n);
    let ideal = conjugate(&u, rho);
    if p_g == 1.0 {
        return ideal;
    }
    let rest = partial_trace(rho, &[q0, q1], n);
    let quarter_identity = DMatrix::from_diagonal_element(4, 4, c(0.25, 0.0));
    let noise = embed_pair_with_rest(&quarter_identity, &rest, q0, q1, n);
    ideal * c(p_g, 0.0) + noise * c(1.0 - p_g, 0.0)
}

/// Dissipative controlled-Z on `qubits`: the ideal gate applied to
/// p_c²·χ + (1−p_c)²·Z⊗Z χ Z⊗Z + p_c(1−p_c)(Z_a χ Z_a + Z_b χ Z_b).
pub fn apply_dissipative_gate(
    chi: &DensityMatrix,
    p_c: f64,
    qubits: (usize, usize),
) -> Result<DensityMatrix> {
    GateModel::Dissipative { p_c }.validate()?;
    let n = chi.n_qubits();
    let (q0, q1) = qubits;
    if q0 >= n || q1 >= n || q0 == q1 {
        return Err(Error::InvalidDensityMatrix("gate qubits out of range"));
    }
    Ok(DensityMatrix::from_raw_unchecked(dissipative_cz_raw(
        chi.matrix(),
        p_c,
        q0,
        q1,
        n,
    )))
}

fn dissipative_cz_raw(
    rho: &DMatrix<Complex64>,
    p_c: f64,
    q0: usize,
    q1: usize,
    n: usize,
) -> DMatrix<Complex64> {
    let za = embed_one(&PAULI_Z, q0, n);
    let zb = embed_one(&PAULI_Z, q1, n);
    let both = &za * &zb;
    let mixed = rho * c(p_c * p_c, 0.0)
        + conjugate(&both, rho) * c((1.0 - p_c) * (1.0 - p_c), 0.0)
        + (conjugate(&za, rho) + conjugate(&zb, rho)) * c(p_c * (1.0 - p_c), 0.0);
    let u = embed_two(&cz_matrix(), q0, q1, n);
    conjugate(&u, &mixed)
}

/// One noisy CNOT according to the gate model. The dissipative CNOT is
/// H_target · CZ_dissipative · H_target with perfect Hadamards.
fn noisy_cnot(
    rho: &DMatrix<Complex64>,
    model: &GateModel,
    control: usize,
    target: usize,
    n: usize,
) -> DMatrix<Complex64> {
    match *model {
        GateModel::Depolarizing { p_g } => {
            depolarize_raw(rho, p_g, &cnot_matrix(), control, target, n)
        }
        GateModel::Dissipative { p_c } => {
            let h = embed_one(&HADAMARD, target, n);
            let rotated = conjugate(&h, rho);
            let gated = dissipative_cz_raw(&rotated, p_c, control, target, n);
            conjugate(&h, &gated)
        }
    }
}

/// Circuit-level distillation of two copies of `rho_pair`. Returns the
/// surviving renormalized pair and the success (coincidence) probability
/// with perfect measurements.
pub fn ed_oracle(rho_pair: &DensityMatrix, model: &GateModel) -> Result<(DensityMatrix, f64)> {
    model.validate()?;
    if rho_pair.dim() != 4 {
        return Err(Error::InvalidDensityMatrix("distillation needs a single pair"));
    }
    // qubits: a1 = 0, b1 = 1, a2 = 2, b2 = 3
    let mut rho = rho_pair.kron(rho_pair)?.matrix().clone();
    let plus = rx(std::f64::consts::FRAC_PI_2);
    let minus = rx(-std::f64::consts::FRAC_PI_2);
    for (op, q) in [(&plus, 0usize), (&minus, 1), (&plus, 2), (&minus, 3)] {
        let u = embed_one(op, q, 4);
        rho = conjugate(&u, &rho);
    }
    rho = noisy_cnot(&rho, model, 0, 2, 4); // Alice: a1 -> a2
    rho = noisy_cnot(&rho, model, 1, 3, 4); // Bob:   b1 -> b2

    let mut kept = DMatrix::zeros(4, 4);
    let mut p_success = 0.0;
    for outcome in [0usize, 1] {
        let proj = embed_one(&z_projector(outcome), 2, 4) * embed_one(&z_projector(outcome), 3, 4);
        let projected = conjugate(&proj, &rho);
        p_success += projected.trace().re;
        kept += partial_trace(&projected, &[2, 3], 4);
    }
    if p_success < 1e-15 {
        return Err(Error::Degenerate {
            context: "ed_oracle",
            value: p_success,
        });
    }
    DensityMatrix::new(kept / c(p_success, 0.0)).map(|dm| (dm, p_success))
}

/// Circuit-level swap of pairs a–b and c–d (qubits 0..3). Averages the four
/// measurement branches after the outcome-conditioned correction on d and
/// returns the end-to-end pair a–d.
pub fn es_oracle(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    model: &GateModel,
) -> Result<DensityMatrix> {
    model.validate()?;
    let rho = rho_a.kron(rho_b)?.matrix().clone();
    let rho = noisy_cnot(&rho, model, 1, 2, 4); // b -> c

    let identity = [
        [c(1.0, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(1.0, 0.0)],
    ];
    let zx = [
        [c(0.0, 0.0), c(1.0, 0.0)],
        [c(-1.0, 0.0), c(0.0, 0.0)],
    ];
    let mut out = DMatrix::zeros(4, 4);
    for m_outcome in [0usize, 1] {
        for l_outcome in [0usize, 1] {
            let proj = embed_one(&x_projector(m_outcome), 1, 4)
                * embed_one(&z_projector(l_outcome), 2, 4);
            let projected = conjugate(&proj, &rho);
            let reduced = partial_trace(&projected, &[1, 2], 4);
            let correction = match (m_outcome, l_outcome) {
                (0, 0) => &identity,
                (0, 1) => &PAULI_X,
                (1, 0) => &PAULI_Z,
                _ => &zx,
            };
            let u = embed_one(correction, 1, 2);
            out += conjugate(&u, &reduced);
        }
    }
    DensityMatrix::new(out)
}

/// CHSH value Tr[ρ·(A0⊗B0 + A0⊗B1 + A1⊗B0 − A1⊗B1)] with the optimal
/// settings A0,1 = (X±Z)/√2, B0 = X, B1 = Z.
pub fn chsh_oracle(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::InvalidDensityMatrix("CHSH needs a single pair"));
    }
    Ok((chsh_operator() * rho.matrix()).trace().re)
}

pub(crate) fn chsh_operator() -> DMatrix<Complex64> {
    let x = one_qubit_matrix(&PAULI_X);
    let z = one_qubit_matrix(&PAULI_Z);
    let a0 = (&x + &z) * c(FRAC_1_SQRT_2, 0.0);
    let a1 = (&x - &z) * c(FRAC_1_SQRT_2, 0.0);
    a0.kronecker(&x) + a0.kronecker(&z) + a1.kronecker(&x) - a1.kronecker(&z)
}

pub(crate) fn one_qubit_matrix(op: &[[Complex64; 2]; 2]) -> DMatrix<Complex64> {
    DMatrix::from_fn(2, 2, |r, col| op[r][col])
}
