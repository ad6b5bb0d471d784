//! Pauli strings as pairs of bit masks.
//!
//! Site `i` (0-based, bit `i` of each mask) carries the letter given by
//! `(x_i, z_i)`: `(0,0)` = I, `(1,0)` = X, `(1,1)` = Y, `(0,1)` = Z. The
//! operator represented is `i^{#Y} · X^x · Z^z`, which is exactly the Hermitian
//! tensor product of the letters since σʸ = i σˣσᶻ.
//!
//! Strings are indexed by `x_mask · 2^L + z_mask`; the enumeration order and
//! every table indexed by Pauli strings use this convention.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::par::{ordered_sum, prelude::*};
use crate::state::{StateVector, C64};

/// Largest `L` for which all `4^L` strings may be enumerated.
pub const MAX_ENUMERATION_SITES: usize = 16;

/// Largest `L` a mask pair can hold.
pub const MAX_SITES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' | 'i' | '0' => Some(Letter::I),
            'X' | 'x' => Some(Letter::X),
            'Y' | 'y' => Some(Letter::Y),
            'Z' | 'z' => Some(Letter::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: u64,
    z: u64,
    len: usize,
}

impl PauliString {
    pub fn new(x_mask: u64, z_mask: u64, len: usize) -> Result<Self> {
        check_len(len)?;
        let full = mask(len);
        if x_mask & !full != 0 || z_mask & !full != 0 {
            return Err(Error::InvalidArgument(format!(
                "mask bits beyond site {len} are set"
            )));
        }
        Ok(PauliString { x: x_mask, z: z_mask, len })
    }

    pub fn identity(len: usize) -> Result<Self> {
        Self::new(0, 0, len)
    }

    /// Builds a string from per-site letters, `letters[0]` being the first site.
    pub fn from_letters(letters: &[Letter]) -> Result<Self> {
        check_len(letters.len())?;
        let (mut x, mut z) = (0u64, 0u64);
        for (i, l) in letters.iter().enumerate() {
            let (xb, zb) = l.bits();
            x |= (xb as u64) << i;
            z |= (zb as u64) << i;
        }
        Ok(PauliString { x, z, len: letters.len() })
    }

    /// Identity everywhere except the listed `(site, letter)` factors.
    pub fn from_sites(len: usize, factors: &[(usize, Letter)]) -> Result<Self> {
        let mut letters = vec![Letter::I; len];
        for &(site, l) in factors {
            if site >= len {
                return Err(Error::InvalidArgument(format!(
                    "site {site} out of range for {len} sites"
                )));
            }
            letters[site] = l;
        }
        Self::from_letters(&letters)
    }

    pub fn from_index(index: u64, len: usize) -> Result<Self> {
        check_len(len)?;
        if len > MAX_ENUMERATION_SITES || index >> (2 * len) != 0 {
            return Err(Error::InvalidArgument(format!(
                "Pauli index {index} out of range for {len} sites"
            )));
        }
        Ok(PauliString {
            x: index >> len,
            z: index & mask(len),
            len,
        })
    }

    /// `x_mask · 2^L + z_mask`.
    pub fn index(&self) -> u64 {
        (self.x << self.len) | self.z
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn letter(&self, site: usize) -> Letter {
        Letter::from_bits(self.x >> site & 1 == 1, self.z >> site & 1 == 1)
    }

    pub fn letters(&self) -> Vec<Letter> {
        (0..self.len).map(|i| self.letter(i)).collect()
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Global phase `i^{#Y}` of the represented operator relative to `X^x Z^z`.
    pub(crate) fn phase(&self) -> C64 {
        match self.y_count() % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        }
    }

    /// Amplitude of `P|ψ⟩` at basis index `c`.
    ///
    /// `P|b⟩ = i^{#Y} (−1)^{|b ∧ z|} |b ⊕ x⟩`, so the amplitude at `c` comes
    /// from `b = c ⊕ x`.
    #[inline]
    pub(crate) fn image_amplitude(&self, phase: C64, amps: &[C64], c: usize) -> C64 {
        let b = c ^ self.x as usize;
        let v = phase * amps[b];
        if (b as u64 & self.z).count_ones() & 1 == 1 {
            -v
        } else {
            v
        }
    }

    fn check_state(&self, s: &StateVector) -> Result<()> {
        if s.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: s.len(),
            });
        }
        Ok(())
    }

    /// `P|ψ⟩`, computed as a signed permutation of the amplitudes.
    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.check_state(s)?;
        let phase = self.phase();
        let src = s.amplitudes();
        let mut out = vec![C64::new(0.0, 0.0); src.len()];
        out.par_chunks_mut(crate::par::BLOCK)
            .enumerate()
            .for_each(|(k, chunk)| {
                let base = k * crate::par::BLOCK;
                for (j, o) in chunk.iter_mut().enumerate() {
                    *o = self.image_amplitude(phase, src, base + j);
                }
            });
        Ok(StateVector::from_normalized(out, self.len))
    }

    /// `⟨ψ|P|ψ⟩` as a complex number, without the reality check.
    pub fn expectation_complex(&self, s: &StateVector) -> Result<C64> {
        self.check_state(s)?;
        let phase = self.phase();
        let a = s.amplitudes();
        Ok(ordered_sum(a.len(), |c| a[c].conj() * self.image_amplitude(phase, a, c)))
    }

    /// `⟨ψ|P|ψ⟩`, which is real because `P` is Hermitian.
    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        let v = self.expectation_complex(s)?;
        if v.im.abs() > 1e-10 {
            return Err(Error::ImaginaryResidual(v.im));
        }
        Ok(v.re)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", self.letter(i).as_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .enumerate()
            .map(|(site, c)| Letter::from_char(c).ok_or(Error::InvalidLetter { site, symbol: c }))
            .collect::<Result<Vec<_>>>()?;
        Self::from_letters(&letters)
    }
}

/// `P|ψ⟩` (free-function form).
pub fn pauli_apply(p: &PauliString, s: &StateVector) -> Result<StateVector> {
    p.apply(s)
}

/// `⟨ψ|P|ψ⟩` (free-function form).
pub fn pauli_expectation(p: &PauliString, s: &StateVector) -> Result<f64> {
    p.expectation(s)
}

/// All `4^L` strings in increasing index order.
#[derive(Clone, Debug)]
pub struct PauliIter {
    len: usize,
    range: Range<u64>,
}

impl PauliIter {
    /// Restricts the enumeration to an index sub-range, for chunked consumers.
    pub fn with_range(len: usize, range: Range<u64>) -> Result<Self> {
        let full = enumerate_paulis(len)?;
        if range.end > full.range.end || range.start > range.end {
            return Err(Error::InvalidArgument(format!(
                "range {range:?} exceeds 4^{len}"
            )));
        }
        Ok(PauliIter { len, range })
    }

    pub fn index_range(&self) -> Range<u64> {
        self.range.clone()
    }
}

impl Iterator for PauliIter {
    type Item = PauliString;

    fn next(&mut self) -> Option<PauliString> {
        let i = self.range.next()?;
        Some(PauliString {
            x: i >> self.len,
            z: i & mask(self.len),
            len: self.len,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        self.range.size_hint()
    }
}

impl ExactSizeIterator for PauliIter {}

pub fn enumerate_paulis(len: usize) -> Result<PauliIter> {
    check_len(len)?;
    if len > MAX_ENUMERATION_SITES {
        return Err(Error::TooManySites {
            what: "exhaustive Pauli enumeration",
            length: len,
            limit: MAX_ENUMERATION_SITES,
        });
    }
    Ok(PauliIter {
        len,
        range: 0..1u64 << (2 * len),
    })
}

fn mask(len: usize) -> u64 {
    if len >= 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

fn check_len(len: usize) -> Result<()> {
    if len == 0 {
        return Err(Error::InvalidArgument("a Pauli string needs at least one site".into()));
    }
    if len > MAX_SITES {
        return Err(Error::TooManySites {
            what: "Pauli string",
            length: len,
            limit: MAX_SITES,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{dense_pauli, random_state};
    use proptest::prelude::*;

    fn p(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn letter_table() {
        let zi = p("ZI");
        assert_eq!((zi.x_mask(), zi.z_mask()), (0b00, 0b01));
        let iii = p("III");
        assert!(iii.is_identity());
        let y = p("Y");
        assert_eq!((y.x_mask(), y.z_mask()), (1, 1));
        assert_eq!(p("XYZI").to_string(), "XYZI");
    }

    #[test]
    fn invalid_letter_reports_site() {
        match "XIQ".parse::<PauliString>() {
            Err(Error::InvalidLetter { site, symbol }) => {
                assert_eq!(site, 2);
                assert_eq!(symbol, 'Q');
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!("".parse::<PauliString>().is_err());
    }

    #[test]
    fn first_site_is_bit_zero() {
        let s = PauliString::from_sites(4, &[(0, Letter::X)]).unwrap();
        assert_eq!(s.x_mask(), 1);
        assert_eq!(s.to_string(), "XIII");
    }

    #[test]
    fn apply_examples() {
        let zero = StateVector::zero(1).unwrap();
        let one = StateVector::basis(1, 1).unwrap();
        assert_eq!(p("X").apply(&zero).unwrap(), one);
        let y0 = p("Y").apply(&zero).unwrap();
        assert_eq!(y0.amplitudes(), &[C64::new(0.0, 0.0), C64::new(0.0, 1.0)]);
        let y1 = p("Y").apply(&one).unwrap();
        assert_eq!(y1.amplitudes(), &[C64::new(0.0, -1.0), C64::new(0.0, 0.0)]);
        let bell = StateVector::ghz(2).unwrap();
        assert_eq!(p("ZZ").apply(&bell).unwrap(), bell);
    }

    #[test]
    fn expectation_examples() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s = StateVector::random(3, &mut rng).unwrap();
        assert!((p("III").expectation(&s).unwrap() - 1.0).abs() < 1e-14);
        let plus = StateVector::plus(1).unwrap();
        assert!(p("Z").expectation(&plus).unwrap().abs() < 1e-15);
        let bell = StateVector::ghz(2).unwrap();
        assert!((p("XX").expectation(&bell).unwrap() - 1.0).abs() < 1e-15);
        assert!((p("YY").expectation(&bell).unwrap() + 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let s = StateVector::zero(2).unwrap();
        assert!(matches!(
            p("XYZ").apply(&s),
            Err(Error::LengthMismatch { expected: 3, found: 2 })
        ));
        assert!(p("XYZ").expectation(&s).is_err());
    }

    #[test]
    fn enumeration_order() {
        let one: Vec<String> = enumerate_paulis(1).unwrap().map(|q| q.to_string()).collect();
        assert_eq!(one, ["I", "Z", "X", "Y"]);
        let two: Vec<PauliString> = enumerate_paulis(2).unwrap().collect();
        assert_eq!(two.len(), 16);
        assert_eq!(two[0].to_string(), "II");
        assert_eq!(two[15].to_string(), "YY");
        assert_eq!(enumerate_paulis(3).unwrap().count(), 64);
        assert!(matches!(
            enumerate_paulis(MAX_ENUMERATION_SITES + 1),
            Err(Error::TooManySites { .. })
        ));
    }

    #[test]
    fn ranged_enumeration_concatenates() {
        let a: Vec<_> = PauliIter::with_range(3, 0..20).unwrap().collect();
        let b: Vec<_> = PauliIter::with_range(3, 20..64).unwrap().collect();
        let all: Vec<_> = enumerate_paulis(3).unwrap().collect();
        assert_eq!([a, b].concat(), all);
        assert!(PauliIter::with_range(3, 0..65).is_err());
    }

    #[test]
    fn expectation_matches_dense_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for len in 1..=4 {
            let s = random_state(len, &mut rng);
            for q in enumerate_paulis(len).unwrap() {
                let m = dense_pauli(&q);
                let a = nalgebra::DVector::from_column_slice(s.amplitudes());
                let oracle = (a.adjoint() * &m * &a)[(0, 0)];
                let fast = q.expectation_complex(&s).unwrap();
                assert!((oracle - fast).norm() < 1e-12, "{q}: {oracle} vs {fast}");
                assert!(fast.im.abs() < 1e-12);
            }
        }
    }

    use rand::SeedableRng;

    proptest! {
        #[test]
        fn index_round_trip(len in 1usize..=8, raw in any::<u64>()) {
            let idx = raw % (1u64 << (2 * len));
            let q = PauliString::from_index(idx, len).unwrap();
            prop_assert_eq!(q.index(), idx);
            let back: PauliString = q.to_string().parse().unwrap();
            prop_assert_eq!(back, q);
        }

        #[test]
        fn apply_is_an_involutive_isometry(len in 1usize..=6, raw in any::<u64>(), seed in any::<u64>()) {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(len, &mut rng);
            let q = PauliString::from_index(raw % (1u64 << (2 * len)), len).unwrap();
            let once = q.apply(&s).unwrap();
            prop_assert!((once.norm() - 1.0).abs() < 1e-12);
            let twice = q.apply(&once).unwrap();
            for (a, b) in twice.amplitudes().iter().zip(s.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }
    }
}
