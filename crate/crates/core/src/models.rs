//! The three spin-chain Hamiltonians as sums of Pauli strings.
//!
//! Site `i` (0-based) of a string is bit `i` of a basis index. Physics
//! notation below uses 1-based sites `1..=L`.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pauli::{Letter, PauliString};
use crate::par::prelude::*;
use crate::sector::Sector;
use crate::state::{StateVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// `Σ_k (1 + (−1)^k δ)/2 (σˣ_k σˣ_{k+1} + σʸ_k σʸ_{k+1})`
    DimerizedXx,
    /// `−Σ σˣ_i σᶻ_{i+1} σˣ_{i+2} + λ Σ σʸ_i σʸ_{i+1}`
    ClusterIsing,
    /// `−Σ σᶻ_i σᶻ_{i+1} − h Σ σˣ_i`
    TransverseIsing,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::DimerizedXx,
        ModelKind::ClusterIsing,
        ModelKind::TransverseIsing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::DimerizedXx => "dimerized-xx",
            ModelKind::ClusterIsing => "cluster-ising",
            ModelKind::TransverseIsing => "transverse-ising",
        }
    }

    /// Symbol of the tuning parameter.
    pub fn parameter_name(self) -> &'static str {
        match self {
            ModelKind::DimerizedXx => "delta",
            ModelKind::ClusterIsing => "lambda",
            ModelKind::TransverseIsing => "h",
        }
    }

    /// Value of the parameter at the transition.
    pub fn critical_point(self) -> f64 {
        match self {
            ModelKind::DimerizedXx => 0.0,
            ModelKind::ClusterIsing | ModelKind::TransverseIsing => 1.0,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "dimerized-xx" | "dxx" | "xx" => Ok(ModelKind::DimerizedXx),
            "cluster-ising" | "ci" | "cluster" => Ok(ModelKind::ClusterIsing),
            "transverse-ising" | "ti" | "ising" => Ok(ModelKind::TransverseIsing),
            _ => Err(Error::InvalidModel(format!("unknown model {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Boundary {
    #[serde(rename = "obc", alias = "open")]
    Open,
    #[serde(rename = "pbc", alias = "periodic")]
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "obc",
            Boundary::Periodic => "pbc",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "obc" | "open" => Ok(Boundary::Open),
            "pbc" | "periodic" => Ok(Boundary::Periodic),
            _ => Err(Error::InvalidModel(format!("unknown boundary {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub length: usize,
    pub parameter: f64,
    pub boundary: Boundary,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, length: usize, parameter: f64, boundary: Boundary) -> Result<Self> {
        let spec = ModelSpec {
            kind,
            length,
            parameter,
            boundary,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let (l, p) = (self.length, self.parameter);
        let bad = |msg: String| Err(Error::InvalidModel(msg));
        if !p.is_finite() {
            return bad(format!("{} = {p} is not finite", self.kind.parameter_name()));
        }
        if l > StateVector::MAX_SITES {
            return Err(Error::TooManySites {
                what: "model",
                length: l,
                limit: StateVector::MAX_SITES,
            });
        }
        let pbc = self.boundary == Boundary::Periodic;
        match self.kind {
            ModelKind::DimerizedXx => {
                if l < 2 || l % 2 != 0 {
                    return bad(format!("dimerized-xx needs an even length >= 2, got {l}"));
                }
                if pbc && l < 4 {
                    return bad(format!("dimerized-xx with pbc needs length >= 4, got {l}"));
                }
                if !(-1.0..=1.0).contains(&p) {
                    return bad(format!("delta must lie in [-1, 1], got {p}"));
                }
            }
            ModelKind::ClusterIsing => {
                if l < 3 {
                    return bad(format!("cluster-ising needs length >= 3, got {l}"));
                }
                if p < 0.0 {
                    return bad(format!("lambda must be >= 0, got {p}"));
                }
            }
            ModelKind::TransverseIsing => {
                if l < 1 {
                    return bad("transverse-ising needs at least one site".into());
                }
                if pbc && l < 3 {
                    return bad(format!("transverse-ising with pbc needs length >= 3, got {l}"));
                }
                if p < 0.0 {
                    return bad(format!("h must be >= 0, got {p}"));
                }
            }
        }
        Ok(())
    }

    pub fn with_parameter(&self, parameter: f64) -> Result<Self> {
        ModelSpec::new(self.kind, self.length, parameter, self.boundary)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} L={} {} {}={}",
            self.kind,
            self.length,
            self.boundary,
            self.kind.parameter_name(),
            self.parameter
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Term {
    pub coefficient: f64,
    pub string: PauliString,
}

/// How the Hilbert space is blocked for the eigensolver.
#[derive(Clone, Debug, PartialEq)]
pub struct SectorDescriptor {
    /// Sector expected to hold the ground state.
    pub target: Sector,
    /// All sectors, in the order they are preferred when energies tie.
    pub decomposition: Vec<Sector>,
}

impl SectorDescriptor {
    pub fn full(len: usize) -> Self {
        SectorDescriptor {
            target: Sector::Full,
            decomposition: Sector::Full.decomposition(len),
        }
    }

    fn new(target: Sector, len: usize) -> Self {
        SectorDescriptor {
            target,
            decomposition: target.decomposition(len),
        }
    }
}

/// `H = Σ_j c_j P_j` with real coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianOperator {
    len: usize,
    terms: Vec<Term>,
    tie_break: Vec<Term>,
    sectors: SectorDescriptor,
}

impl HamiltonianOperator {
    /// A Hamiltonian with no symmetry information; it is solved in the full space.
    pub fn new(len: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            if t.string.len() != len {
                return Err(Error::LengthMismatch {
                    expected: len,
                    found: t.string.len(),
                });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::InvalidModel(format!("coefficient of {} is not finite", t.string)));
            }
        }
        if len == 0 || len > StateVector::MAX_SITES {
            return Err(Error::TooManySites {
                what: "hamiltonian",
                length: len,
                limit: StateVector::MAX_SITES,
            });
        }
        Ok(HamiltonianOperator {
            len,
            terms,
            tie_break: Vec::new(),
            sectors: SectorDescriptor::full(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Unit-strength field used to split degenerate ground states.
    pub fn tie_break(&self) -> &[Term] {
        &self.tie_break
    }

    pub fn sectors(&self) -> &SectorDescriptor {
        &self.sectors
    }

    pub fn with_tie_break(mut self, field: Vec<Term>) -> Result<Self> {
        if let Some(t) = field.iter().find(|t| t.string.len() != self.len) {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: t.string.len(),
            });
        }
        self.tie_break = field;
        Ok(self)
    }

    pub fn with_sectors(mut self, sectors: SectorDescriptor) -> Self {
        self.sectors = sectors;
        self
    }

    /// `H + ε·F`, where `F` is the tie-break field. The sector structure is kept.
    pub fn perturbed(&self, epsilon: f64) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(self.tie_break.iter().map(|t| Term {
            coefficient: epsilon * t.coefficient,
            string: t.string,
        }));
        HamiltonianOperator {
            len: self.len,
            terms,
            tie_break: self.tie_break.clone(),
            sectors: self.sectors.clone(),
        }
    }

    /// `f·H`.
    pub fn scaled(&self, factor: f64) -> Self {
        let scale = |ts: &[Term]| {
            ts.iter()
                .map(|t| Term {
                    coefficient: factor * t.coefficient,
                    string: t.string,
                })
                .collect()
        };
        HamiltonianOperator {
            len: self.len,
            terms: scale(&self.terms),
            tie_break: self.tie_break.clone(),
            sectors: self.sectors.clone(),
        }
    }

    /// True when every term has an even number of `Y` letters, so `H` is a
    /// real matrix in the computational basis.
    pub fn is_real(&self) -> bool {
        self.terms.iter().all(|t| t.string.y_count() % 2 == 0)
    }

    /// `out = H·v` on raw amplitude slices of length `2^L`.
    pub fn apply_into(&self, v: &[C64], out: &mut [C64]) {
        debug_assert_eq!(v.len(), 1 << self.len);
        debug_assert_eq!(out.len(), v.len());
        let weighted: Vec<(C64, &PauliString)> = self
            .terms
            .iter()
            .map(|t| (t.string.phase() * t.coefficient, &t.string))
            .collect();
        out.par_chunks_mut(crate::par::BLOCK)
            .enumerate()
            .for_each(|(blk, chunk)| {
                let base = blk * crate::par::BLOCK;
                for (off, o) in chunk.iter_mut().enumerate() {
                    let c = base + off;
                    let mut acc = C64::new(0.0, 0.0);
                    for (w, p) in &weighted {
                        acc += p.image_amplitude(*w, v, c);
                    }
                    *o = acc;
                }
            });
    }

    /// `⟨ψ|H|ψ⟩`.
    pub fn expectation(&self, s: &StateVector) -> Result<f64> {
        if s.len() != self.len {
            return Err(Error::LengthMismatch {
                expected: self.len,
                found: s.len(),
            });
        }
        let mut hv = vec![C64::new(0.0, 0.0); s.dim()];
        self.apply_into(s.amplitudes(), &mut hv);
        Ok(crate::state::inner(s.amplitudes(), &hv).re)
    }
}

/// `H|ψ⟩` as raw (unnormalized) amplitudes.
pub fn apply_hamiltonian(h: &HamiltonianOperator, s: &StateVector) -> Result<Vec<C64>> {
    if s.len() != h.len() {
        return Err(Error::LengthMismatch {
            expected: h.len(),
            found: s.len(),
        });
    }
    let mut out = vec![C64::new(0.0, 0.0); s.dim()];
    h.apply_into(s.amplitudes(), &mut out);
    Ok(out)
}

pub fn build_model(spec: &ModelSpec) -> Result<HamiltonianOperator> {
    spec.validate()?;
    let len = spec.length;
    let p = spec.parameter;
    let pbc = spec.boundary == Boundary::Periodic;
    let mut terms = Vec::new();
    let mut add = |c: f64, factors: &[(usize, Letter)]| -> Result<()> {
        terms.push(Term {
            coefficient: c,
            string: PauliString::from_sites(len, factors)?,
        });
        Ok(())
    };
    use Letter::{X, Y, Z};
    let field = match spec.kind {
        ModelKind::DimerizedXx => {
            // Bond k (1-based) joins sites k and k+1.
            for k in 1..len {
                let w = 0.5 * (1.0 + if k % 2 == 0 { p } else { -p });
                add(w, &[(k - 1, X), (k, X)])?;
                add(w, &[(k - 1, Y), (k, Y)])?;
            }
            if pbc {
                let w = 0.5 * (1.0 + p);
                add(w, &[(0, X), (len - 1, X)])?;
                add(w, &[(0, Y), (len - 1, Y)])?;
            }
            vec![(1.0, vec![(0, Z)])]
        }
        ModelKind::ClusterIsing => {
            for i in 0..len - 2 {
                add(-1.0, &[(i, X), (i + 1, Z), (i + 2, X)])?;
            }
            for i in 0..len - 1 {
                add(p, &[(i, Y), (i + 1, Y)])?;
            }
            if pbc {
                add(-1.0, &[(len - 2, X), (len - 1, Z), (0, X)])?;
                add(-1.0, &[(len - 1, X), (0, Z), (1, X)])?;
                add(p, &[(0, Y), (len - 1, Y)])?;
            }
            vec![
                (-1.0, vec![(0, Y), (1, X)]),
                (-1.0, vec![(len - 2, X), (len - 1, Y)]),
            ]
        }
        ModelKind::TransverseIsing => {
            for i in 0..len.saturating_sub(1) {
                add(-1.0, &[(i, Z), (i + 1, Z)])?;
            }
            if pbc {
                add(-1.0, &[(0, Z), (len - 1, Z)])?;
            }
            for i in 0..len {
                add(-p, &[(i, X)])?;
            }
            (0..len).map(|i| (-1.0, vec![(i, X)])).collect()
        }
    };
    let tie_break = field
        .into_iter()
        .map(|(c, f)| {
            Ok(Term {
                coefficient: c,
                string: PauliString::from_sites(len, &f)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HamiltonianOperator::new(len, terms)?
        .with_tie_break(tie_break)?
        .with_sectors(symmetry_sector(spec)))
}

/// Conserved quantity used to block each model, with the sector that holds
/// the ground state listed first.
pub fn symmetry_sector(spec: &ModelSpec) -> SectorDescriptor {
    let target = match spec.kind {
        ModelKind::DimerizedXx => Sector::Magnetization(0),
        ModelKind::ClusterIsing => Sector::ZParity { even: true },
        ModelKind::TransverseIsing => Sector::XParity { even: true },
    };
    SectorDescriptor::new(target, spec.length)
}
