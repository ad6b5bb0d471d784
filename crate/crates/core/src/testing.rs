//! Dense-matrix oracles for unit tests. Everything here is built from explicit
//! Kronecker products so it shares no code with the bitmask kernels.

use nalgebra::DMatrix;
use rand::Rng;

use crate::models::HamiltonianOperator;
use crate::pauli::{Letter, PauliString};
use crate::state::{StateVector, C64};

pub(crate) fn random_state<R: Rng>(len: usize, rng: &mut R) -> StateVector {
    StateVector::random(len, rng).unwrap()
}

fn letter_matrix(l: Letter) -> DMatrix<C64> {
    let o = C64::new(0.0, 0.0);
    let e = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match l {
        Letter::I => DMatrix::from_row_slice(2, 2, &[e, o, o, e]),
        Letter::X => DMatrix::from_row_slice(2, 2, &[o, e, e, o]),
        Letter::Y => DMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
        Letter::Z => DMatrix::from_row_slice(2, 2, &[e, o, o, -e]),
    }
}

/// `M_{L-1} ⊗ … ⊗ M_0`, so that site 0 is the least significant bit.
pub(crate) fn dense_pauli(p: &PauliString) -> DMatrix<C64> {
    let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for site in 0..p.len() {
        m = letter_matrix(p.letter(site)).kronecker(&m);
    }
    m
}

pub(crate) fn dense_hamiltonian(h: &HamiltonianOperator) -> DMatrix<C64> {
    let dim = 1usize << h.len();
    let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
    for t in h.terms() {
        m += dense_pauli(&t.string) * C64::new(t.coefficient, 0.0);
    }
    m
}

/// Sorted eigenvalues of a Hermitian matrix.
pub(crate) fn dense_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}
