//! Symmetry sectors used to block the eigenproblem.
//!
//! Every sector here is an eigenspace of a Pauli-type symmetry and has an
//! orthonormal basis made of computational basis states or of symmetric /
//! antisymmetric pairs of them, so projection and dense restriction are cheap.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::state::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    /// The whole Hilbert space.
    Full,
    /// Fixed total magnetization `Σσᶻ`.
    Magnetization(i32),
    /// Fixed eigenvalue of `Πσᶻ` (`even` ⇔ +1).
    ZParity { even: bool },
    /// Fixed eigenvalue of `Πσˣ` (`even` ⇔ +1).
    XParity { even: bool },
}

/// One orthonormal basis vector of a sector.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SectorBasisVector {
    Single(usize),
    /// `(|a⟩ + sign·|b⟩)/√2`
    Pair(usize, usize, f64),
}

impl SectorBasisVector {
    pub fn entries(&self) -> impl Iterator<Item = (usize, f64)> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let (first, second) = match *self {
            SectorBasisVector::Single(i) => ((i, 1.0), None),
            SectorBasisVector::Pair(a, b, s) => ((a, h), Some((b, s * h))),
        };
        std::iter::once(first).chain(second)
    }

    pub fn scatter(&self, coefficient: C64, out: &mut [C64]) {
        for (i, w) in self.entries() {
            out[i] += coefficient * w;
        }
    }

    pub fn dot(&self, v: &[C64]) -> C64 {
        self.entries().map(|(i, w)| v[i] * w).sum()
    }
}

impl Sector {
    pub fn dimension(&self, len: usize) -> usize {
        match *self {
            Sector::Full => 1 << len,
            Sector::Magnetization(m) => match down_count(len, m) {
                Some(k) => binomial(len, k),
                None => 0,
            },
            Sector::ZParity { .. } | Sector::XParity { .. } => {
                if len == 0 {
                    0
                } else {
                    1 << (len - 1)
                }
            }
        }
    }

    pub fn basis(&self, len: usize) -> Vec<SectorBasisVector> {
        let dim = 1usize << len;
        match *self {
            Sector::Full => (0..dim).map(SectorBasisVector::Single).collect(),
            Sector::Magnetization(m) => match down_count(len, m) {
                Some(k) => (0..dim)
                    .filter(|b| b.count_ones() as usize == k)
                    .map(SectorBasisVector::Single)
                    .collect(),
                None => Vec::new(),
            },
            Sector::ZParity { even } => (0..dim)
                .filter(|b| (b.count_ones() % 2 == 0) == even)
                .map(SectorBasisVector::Single)
                .collect(),
            Sector::XParity { even } => {
                let flip = dim - 1;
                let sign = if even { 1.0 } else { -1.0 };
                (0..dim / 2)
                    .map(|b| SectorBasisVector::Pair(b, b ^ flip, sign))
                    .collect()
            }
        }
    }

    /// Orthogonal projection onto the sector, in place.
    pub fn project(&self, v: &mut [C64]) {
        let dim = v.len();
        match *self {
            Sector::Full => {}
            Sector::Magnetization(m) => {
                let len = dim.trailing_zeros() as usize;
                let keep = down_count(len, m);
                for (b, a) in v.iter_mut().enumerate() {
                    if Some(b.count_ones() as usize) != keep {
                        *a = C64::new(0.0, 0.0);
                    }
                }
            }
            Sector::ZParity { even } => {
                for (b, a) in v.iter_mut().enumerate() {
                    if (b.count_ones() % 2 == 0) != even {
                        *a = C64::new(0.0, 0.0);
                    }
                }
            }
            Sector::XParity { even } => {
                let flip = dim - 1;
                let sign = if even { 1.0 } else { -1.0 };
                for b in 0..dim / 2 {
                    let (lo, hi) = (v[b], v[b ^ flip]);
                    let sym = (lo + hi * sign) * 0.5;
                    v[b] = sym;
                    v[b ^ flip] = sym * sign;
                }
            }
        }
    }

    /// Sectors that together span the full space, in preference order with
    /// `self` first.
    pub fn decomposition(&self, len: usize) -> Vec<Sector> {
        match *self {
            Sector::Full => vec![Sector::Full],
            Sector::ZParity { even } => vec![*self, Sector::ZParity { even: !even }],
            Sector::XParity { even } => vec![*self, Sector::XParity { even: !even }],
            Sector::Magnetization(m0) => {
                let mut all: Vec<i32> = (0..=len as i32).map(|k| len as i32 - 2 * k).collect();
                all.sort_by_key(|&m| ((m - m0).abs(), m));
                all.into_iter().map(Sector::Magnetization).collect()
            }
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Full => write!(f, "full"),
            Sector::Magnetization(m) => write!(f, "Sz={m}"),
            Sector::ZParity { even } => write!(f, "Pz={}", if *even { "+1" } else { "-1" }),
            Sector::XParity { even } => write!(f, "Px={}", if *even { "+1" } else { "-1" }),
        }
    }
}

fn down_count(len: usize, magnetization: i32) -> Option<usize> {
    let d = len as i32 - magnetization;
    if d < 0 || d % 2 != 0 || d / 2 > len as i32 {
        None
    } else {
        Some((d / 2) as usize)
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimensions() {
        assert_eq!(Sector::Magnetization(0).dimension(8), 70);
        assert_eq!(Sector::Magnetization(0).basis(8).len(), 70);
        assert_eq!(Sector::Magnetization(1).dimension(8), 0);
        assert_eq!(Sector::XParity { even: true }.dimension(4), 8);
        assert_eq!(Sector::ZParity { even: false }.basis(4).len(), 8);
        assert_eq!(Sector::Full.dimension(5), 32);
    }

    #[test]
    fn decompositions_cover_the_space() {
        for s in [
            Sector::Full,
            Sector::Magnetization(0),
            Sector::ZParity { even: true },
            Sector::XParity { even: true },
        ] {
            let total: usize = s.decomposition(6).iter().map(|t| t.dimension(6)).sum();
            assert_eq!(total, 64, "{s}");
            assert_eq!(s.decomposition(6)[0], s);
        }
    }

    #[test]
    fn projection_is_idempotent_and_matches_basis() {
        let len = 4;
        let v: Vec<C64> = (0..16).map(|i| C64::new(i as f64 * 0.1 - 0.3, (i * i) as f64 * 0.01)).collect();
        for s in [
            Sector::Magnetization(2),
            Sector::ZParity { even: false },
            Sector::XParity { even: true },
            Sector::XParity { even: false },
        ] {
            let mut once = v.clone();
            s.project(&mut once);
            let mut twice = once.clone();
            s.project(&mut twice);
            assert_eq!(once, twice);
            // Rebuild the projection from the orthonormal basis.
            let mut rebuilt = vec![C64::new(0.0, 0.0); 16];
            for e in s.basis(len) {
                e.scatter(e.dot(&v), &mut rebuilt);
            }
            for (a, b) in once.iter().zip(&rebuilt) {
                assert!((a - b).norm() < 1e-14, "{s}");
            }
        }
    }
}
