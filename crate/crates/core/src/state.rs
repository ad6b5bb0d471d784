//! Pure states of `L` qubits in the computational (σᶻ) basis.
//!
//! Basis ordering: bit `i` of a basis index is the σᶻ occupation of site `i`
//! (0-based), so bit 0 is the first site of the chain. A set bit means the
//! spin is in `|1⟩` (σᶻ = −1).

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::par::{ordered_sum, prelude::*};

pub type C64 = Complex64;

/// A 2×2 single-qubit operator in row-major order, acting on `[⟨0|, ⟨1|]`.
pub type Gate = [[C64; 2]; 2];

const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<C64>,
    len: usize,
}

impl StateVector {
    /// Largest chain a dense state vector is allowed to represent.
    pub const MAX_SITES: usize = 26;

    /// Builds a state from raw amplitudes, normalizing them.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(dim));
        }
        let len = dim.trailing_zeros() as usize;
        check_sites(len)?;
        let mut state = StateVector { amps, len };
        state.normalize()?;
        Ok(state)
    }

    /// Wraps amplitudes that are already normalized up to rounding.
    pub(crate) fn from_normalized(amps: Vec<C64>, len: usize) -> Self {
        debug_assert_eq!(amps.len(), 1 << len);
        StateVector { amps, len }
    }

    /// The computational basis state with the given index.
    pub fn basis(len: usize, index: usize) -> Result<Self> {
        check_sites(len)?;
        if index >= 1 << len {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {len} sites"
            )));
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << len];
        amps[index] = C64::new(1.0, 0.0);
        Ok(StateVector { amps, len })
    }

    /// `|0…0⟩`.
    pub fn zero(len: usize) -> Result<Self> {
        Self::basis(len, 0)
    }

    /// `|+⟩^⊗L`.
    pub fn plus(len: usize) -> Result<Self> {
        check_sites(len)?;
        let a = (1.0 / (1u64 << len) as f64).sqrt();
        Ok(StateVector {
            amps: vec![C64::new(a, 0.0); 1 << len],
            len,
        })
    }

    /// `(|0…0⟩ + |1…1⟩)/√2`.
    pub fn ghz(len: usize) -> Result<Self> {
        check_sites(len)?;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << len];
        let a = std::f64::consts::FRAC_1_SQRT_2;
        amps[0] = C64::new(a, 0.0);
        amps[(1 << len) - 1] += C64::new(a, 0.0);
        Self::from_amplitudes(amps)
    }

    /// Tensor product of single-qubit states; `sites[0]` is the first site.
    pub fn product(sites: &[[C64; 2]]) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::InvalidArgument("product state needs at least one site".into()));
        }
        let mut amps = vec![C64::new(1.0, 0.0)];
        for (i, q) in sites.iter().enumerate() {
            let mut next = vec![C64::new(0.0, 0.0); amps.len() * 2];
            for (b, a) in amps.iter().enumerate() {
                next[b] = a * q[0];
                next[b | (1 << i)] = a * q[1];
            }
            amps = next;
        }
        Self::from_amplitudes(amps)
    }

    /// `|self⟩ ⊗ |other⟩`, with `self` occupying the first sites.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let len = self.len + other.len;
        check_sites(len)?;
        let mut amps = Vec::with_capacity(1 << len);
        for b in other.amps.iter() {
            amps.extend(self.amps.iter().map(|a| a * b));
        }
        Ok(StateVector { amps, len })
    }

    /// Haar-random state from i.i.d. complex Gaussian amplitudes.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Result<Self> {
        check_sites(len)?;
        let amps = (0..1usize << len)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                C64::new(re, im)
            })
            .collect();
        Self::from_amplitudes(amps)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::NotNormalized(n));
        }
        if (n - 1.0).abs() > NORM_TOL / 4.0 {
            let inv = 1.0 / n;
            self.amps.iter_mut().for_each(|a| *a *= inv);
        }
        Ok(())
    }

    pub(crate) fn check_normalized(&self, tol: f64) -> Result<()> {
        let n = self.norm();
        if (n - 1.0).abs() > tol {
            return Err(Error::NotNormalized(n));
        }
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.len != other.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: other.len,
            });
        }
        Ok(inner(&self.amps, &other.amps))
    }

    /// Applies a 2×2 operator to one site.
    pub fn apply_gate(&self, site: usize, gate: &Gate) -> Result<Self> {
        if site >= self.len {
            return Err(Error::InvalidArgument(format!(
                "site {site} out of range for {} sites",
                self.len
            )));
        }
        let mut amps = self.amps.clone();
        apply_gate_in_place(&mut amps, site, gate);
        Ok(StateVector { amps, len: self.len })
    }

    /// Applies one 2×2 operator per site (`gates[i]` acts on site `i`).
    pub fn apply_local(&self, gates: &[Gate]) -> Result<Self> {
        if gates.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: gates.len(),
            });
        }
        let mut amps = self.amps.clone();
        for (site, g) in gates.iter().enumerate() {
            apply_gate_in_place(&mut amps, site, g);
        }
        Ok(StateVector { amps, len: self.len })
    }
}

fn check_sites(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidArgument("a state needs at least one site".into()));
    }
    if len > StateVector::MAX_SITES {
        return Err(Error::TooManySites {
            what: "state vector",
            length: len,
            limit: StateVector::MAX_SITES,
        });
    }
    Ok(())
}

fn apply_gate_in_place(amps: &mut [C64], site: usize, g: &Gate) {
    let bit = 1usize << site;
    // Pairs (b, b|bit) live inside aligned blocks of 2*bit amplitudes.
    amps.par_chunks_mut(2 * bit).for_each(|block| {
        let (lo, hi) = block.split_at_mut(bit);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            let (x0, x1) = (*a0, *a1);
            *a0 = g[0][0] * x0 + g[0][1] * x1;
            *a1 = g[1][0] * x0 + g[1][1] * x1;
        }
    });
}

pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    ordered_sum(a.len(), |i| a[i].conj() * b[i])
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    ordered_sum(a.len(), |i| a[i].norm_sqr()).sqrt()
}
