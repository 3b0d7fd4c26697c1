//! Validated density matrices on one or two qubit pairs, plus the register
//! arithmetic (embeddings, partial traces) the circuit oracles need.
//!
//! Basis ordering is computational with the first qubit as the most
//! significant bit: |00⟩, |01⟩, |10⟩, |11⟩ for one pair.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::bell::BellDiagonalState;
use crate::error::{Error, Result};

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const EIGENVALUE_TOL: f64 = -1e-10;

/// A 4×4 (one pair) or 16×16 (two pairs) density matrix, validated to be
/// Hermitian, unit-trace and positive semidefinite within tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim || (dim != 4 && dim != 16) {
            return Err(Error::InvalidDensityMatrix("dimension must be 4 or 16"));
        }
        let herm_err = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > HERMITICITY_TOL {
            return Err(Error::InvalidDensityMatrix("not Hermitian"));
        }
        if (m.trace().re - 1.0).abs() > TRACE_TOL || m.trace().im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensityMatrix("trace is not 1"));
        }
        let eigen = m.clone().symmetric_eigen();
        if eigen.eigenvalues.iter().any(|&e| e < EIGENVALUE_TOL) {
            return Err(Error::InvalidDensityMatrix("negative eigenvalue"));
        }
        Ok(Self { m })
    }

    /// Builds Σ ci·|φi⟩⟨φi| from Bell coefficients.
    pub fn from_bell_diagonal(state: &BellDiagonalState) -> Self {
        let mut m = DMatrix::zeros(4, 4);
        for (i, ci) in state.coeffs().into_iter().enumerate() {
            m += bell_projector_matrix(i + 1) * Complex64::new(ci, 0.0);
        }
        Self { m }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        if self.dim() == 4 {
            2
        } else {
            4
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// Two-pair state ρ ⊗ σ; with ρ on qubits (0, 1) and σ on qubits (2, 3).
    pub fn kron(&self, rhs: &DensityMatrix) -> Result<DensityMatrix> {
        if self.dim() != 4 || rhs.dim() != 4 {
            return Err(Error::InvalidDensityMatrix(
                "kron is only defined for two single-pair states",
            ));
        }
        Ok(DensityMatrix {
            m: self.m.kronecker(&rhs.m),
        })
    }

    /// Bell coefficients Tr[Pi ρ] of a single-pair state.
    pub fn bell_coeffs(&self) -> Result<[f64; 4]> {
        if self.dim() != 4 {
            return Err(Error::InvalidDensityMatrix(
                "bell coefficients are only defined for a single pair",
            ));
        }
        let mut c = [0.0; 4];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = (bell_projector_matrix(i + 1) * &self.m).trace().re;
        }
        Ok(c)
    }

    pub(crate) fn from_raw_unchecked(m: DMatrix<Complex64>) -> Self {
        Self { m }
    }
}

/// The projector |φi⟩⟨φi| onto the i-th Bell state, i ∈ {1, 2, 3, 4}.
pub fn bell_projector(i: usize) -> Result<DensityMatrix> {
    if !(1..=4).contains(&i) {
        return Err(Error::domain("i", i as f64, "{1, 2, 3, 4}"));
    }
    // projectors are valid density matrices by construction
    Ok(DensityMatrix {
        m: bell_projector_matrix(i),
    })
}

pub(crate) fn bell_vector(i: usize) -> [Complex64; 4] {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let z = Complex64::new(0.0, 0.0);
    match i {
        1 => [r, z, z, r],
        2 => [r, z, z, -r],
        3 => [z, r, r, z],
        4 => [z, r, -r, z],
        _ => unreachable!("bell index out of range"),
    }
}

pub(crate) fn bell_projector_matrix(i: usize) -> DMatrix<Complex64> {
    let v = bell_vector(i);
    DMatrix::from_fn(4, 4, |r, c| v[r] * v[c].conj())
}

// --- register arithmetic on raw matrices ------------------------------------

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bit(index: usize, qubit: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - 1 - qubit)) & 1
}

fn with_bit(index: usize, qubit: usize, n_qubits: usize, value: usize) -> usize {
    let mask = 1usize << (n_qubits - 1 - qubit);
    (index & !mask) | (value * mask)
}

/// Embeds a single-qubit operator at position `q` of an `n_qubits` register.
pub(crate) fn embed_one(op: &[[Complex64; 2]; 2], q: usize, n_qubits: usize) -> DMatrix<Complex64> {
    let dim = 1usize << n_qubits;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let b = bit(col, q, n_qubits);
        for (new_b, row_op) in op.iter().enumerate() {
            let amp = row_op[b];
            if amp != c(0.0, 0.0) {
                let row = with_bit(col, q, n_qubits, new_b);
                out[(row, col)] += amp;
            }
        }
    }
    out
}

/// Embeds a two-qubit operator acting on positions (q0, q1), q0 being the
/// more significant bit of the operator's own 4-dim basis.
pub(crate) fn embed_two(
    op: &DMatrix<Complex64>,
    q0: usize,
    q1: usize,
    n_qubits: usize,
) -> DMatrix<Complex64> {
    debug_assert_eq!(op.nrows(), 4);
    let dim = 1usize << n_qubits;
    let mut out = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let sub_in = bit(col, q0, n_qubits) * 2 + bit(col, q1, n_qubits);
        for sub_out in 0..4 {
            let amp = op[(sub_out, sub_in)];
            if amp != c(0.0, 0.0) {
                let row = with_bit(
                    with_bit(col, q0, n_qubits, sub_out >> 1),
                    q1,
                    n_qubits,
                    sub_out & 1,
                );
                out[(row, col)] += amp;
            }
        }
    }
    out
}

/// U ρ U†.
pub(crate) fn conjugate(u: &DMatrix<Complex64>, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    u * rho * u.adjoint()
}

/// Traces out the qubits listed in `traced`, keeping the rest in order.
pub(crate) fn partial_trace(
    rho: &DMatrix<Complex64>,
    traced: &[usize],
    n_qubits: usize,
) -> DMatrix<Complex64> {
    let keep: Vec<usize> = (0..n_qubits).filter(|q| !traced.contains(q)).collect();
    let dim_out = 1usize << keep.len();
    let dim = 1usize << n_qubits;
    let mut out = DMatrix::zeros(dim_out, dim_out);
    for r in 0..dim {
        for col in 0..dim {
            if traced.iter().any(|&q| bit(r, q, n_qubits) != bit(col, q, n_qubits)) {
                continue;
            }
            let mut ro = 0usize;
            let mut co = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                let shift = keep.len() - 1 - pos;
                ro |= bit(r, q, n_qubits) << shift;
                co |= bit(col, q, n_qubits) << shift;
            }
            out[(ro, co)] += rho[(r, col)];
        }
    }
    out
}

/// Reassembles `pair_state` on qubits (q0, q1) tensored with `rest` on the
/// remaining qubits (in register order).
pub(crate) fn embed_pair_with_rest(
    pair_state: &DMatrix<Complex64>,
    rest: &DMatrix<Complex64>,
    q0: usize,
    q1: usize,
    n_qubits: usize,
) -> DMatrix<Complex64> {
    let keep: Vec<usize> = (0..n_qubits).filter(|&q| q != q0 && q != q1).collect();
    let dim = 1usize << n_qubits;
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for col in 0..dim {
            let pr = bit(r, q0, n_qubits) * 2 + bit(r, q1, n_qubits);
            let pc = bit(col, q0, n_qubits) * 2 + bit(col, q1, n_qubits);
            let mut rr = 0usize;
            let mut rc = 0usize;
            for (pos, &q) in keep.iter().enumerate() {
                let shift = keep.len() - 1 - pos;
                rr |= bit(r, q, n_qubits) << shift;
                rc |= bit(col, q, n_qubits) << shift;
            }
            out[(r, col)] = pair_state[(pr, pc)] * rest[(rr, rc)];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projectors_are_orthonormal_and_complete() {
        let mut sum = DMatrix::<Complex64>::zeros(4, 4);
        for i in 1..=4 {
            for j in 1..=4 {
                let tr = (bell_projector_matrix(i) * bell_projector_matrix(j)).trace();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((tr.re - want).abs() < 1e-14 && tr.im.abs() < 1e-14);
            }
            sum += bell_projector_matrix(i);
        }
        for r in 0..4 {
            for col in 0..4 {
                let want = if r == col { 1.0 } else { 0.0 };
                assert!((sum[(r, col)].re - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn first_projector_entries() {
        let p = bell_projector(1).unwrap();
        let m = p.matrix();
        for (r, col) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            assert!((m[(r, col)].re - 0.5).abs() < 1e-15);
        }
        assert_eq!(m[(1, 1)], c(0.0, 0.0));
        assert!(bell_projector(0).is_err());
        assert!(bell_projector(5).is_err());
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        // wrong trace
        let m = DMatrix::from_diagonal_element(4, 4, c(0.5, 0.0));
        assert!(DensityMatrix::new(m).is_err());
        // not Hermitian
        let mut m = DMatrix::from_diagonal_element(4, 4, c(0.25, 0.0));
        m[(0, 1)] = c(0.3, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        // Hermitian, unit trace, but indefinite
        let mut m = DMatrix::from_diagonal_element(4, 4, c(0.25, 0.0));
        m[(0, 1)] = c(0.5, 0.0);
        m[(1, 0)] = c(0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
        // valid
        let s = BellDiagonalState::new([0.7, 0.2, 0.1, 0.0]).unwrap();
        let dm = DensityMatrix::from_bell_diagonal(&s);
        assert!(DensityMatrix::new(dm.matrix().clone()).is_ok());
    }

    #[test]
    fn bell_coeffs_round_trip() {
        let s = BellDiagonalState::new([0.6, 0.25, 0.1, 0.05]).unwrap();
        let dm = DensityMatrix::from_bell_diagonal(&s);
        let c = dm.bell_coeffs().unwrap();
        for (a, b) in c.iter().zip(s.coeffs()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn partial_trace_of_product_state() {
        let a = DensityMatrix::from_bell_diagonal(
            &BellDiagonalState::new([0.9, 0.1, 0.0, 0.0]).unwrap(),
        );
        let b = DensityMatrix::from_bell_diagonal(
            &BellDiagonalState::new([0.5, 0.3, 0.2, 0.0]).unwrap(),
        );
        let two = a.kron(&b).unwrap();
        let back = partial_trace(two.matrix(), &[2, 3], 4);
        for r in 0..4 {
            for col in 0..4 {
                assert!((back[(r, col)] - a.matrix()[(r, col)]).norm() < 1e-14);
            }
        }
        let back = partial_trace(two.matrix(), &[0, 1], 4);
        for r in 0..4 {
            for col in 0..4 {
                assert!((back[(r, col)] - b.matrix()[(r, col)]).norm() < 1e-14);
            }
        }
    }
}
