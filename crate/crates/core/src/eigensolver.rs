//! Exact diagonalization inside symmetry sectors.
//!
//! Each sector of the Hamiltonian's decomposition is solved independently,
//! densely when small and with Lanczos (full reorthogonalization, one locked
//! eigenpair at a time) otherwise. The per-sector spectra are merged to get the
//! full-space gap.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::HamiltonianOperator;
use crate::par::{ordered_sum, prelude::*};
use crate::sector::{Sector, SectorBasisVector};
use crate::state::{StateVector, C64};

/// Largest chain the solver accepts.
pub const MAX_SOLVER_SITES: usize = 20;

const DENSE_HARD_LIMIT: usize = 8192;
const PHASE_TIE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    Auto,
    Dense,
    Lanczos,
}

impl std::str::FromStr for SolverMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(SolverMethod::Auto),
            "dense" => Ok(SolverMethod::Dense),
            "lanczos" => Ok(SolverMethod::Lanczos),
            _ => Err(Error::InvalidArgument(format!("unknown solver method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
    pub degeneracy_epsilon: f64,
    pub degeneracy_threshold: f64,
    pub dense_max_dimension: usize,
    pub method: SolverMethod,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: 2000,
            seed: 20_240_917,
            degeneracy_epsilon: 1e-7,
            degeneracy_threshold: 1e-8,
            dense_max_dimension: 512,
            method: SolverMethod::Auto,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return bad("solver tolerance must be positive");
        }
        if self.max_iterations == 0 {
            return bad("solver max_iterations must be positive");
        }
        if !(self.degeneracy_epsilon >= 0.0 && self.degeneracy_epsilon.is_finite()) {
            return bad("degeneracy_epsilon must be >= 0");
        }
        if !(self.degeneracy_threshold >= 0.0 && self.degeneracy_threshold.is_finite()) {
            return bad("degeneracy_threshold must be >= 0");
        }
        if self.dense_max_dimension > DENSE_HARD_LIMIT {
            return Err(Error::InvalidArgument(format!(
                "dense_max_dimension is capped at {DENSE_HARD_LIMIT}"
            )));
        }
        Ok(())
    }

    fn threshold(&self, e0: f64) -> f64 {
        self.degeneracy_threshold * e0.abs().max(1.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundStateResult {
    pub energy: f64,
    pub state: StateVector,
    /// `E₁ − E₀` over the whole Hilbert space.
    pub gap: f64,
    pub degenerate: bool,
    /// Lanczos iterations summed over all sector solves.
    pub iterations: usize,
    /// `‖H|ψ⟩ − E|ψ⟩‖`.
    pub residual: f64,
    /// Method used in the ground-state sector.
    pub method: SolverMethod,
    pub sector: Sector,
    pub seed: u64,
    pub tie_break_applied: bool,
}

/// A Hamiltonian restricted to one sector, applied on the fly.
struct SectorOperator<'a> {
    h: &'a HamiltonianOperator,
    basis: Vec<SectorBasisVector>,
    /// For each full-space index: position in `basis` and weight, or `u32::MAX`.
    slot: Vec<(u32, f64)>,
    terms: Vec<(u64, u64, C64)>,
}

impl<'a> SectorOperator<'a> {
    fn new(h: &'a HamiltonianOperator, sector: Sector) -> Self {
        let len = h.len();
        let basis = sector.basis(len);
        let mut slot = vec![(u32::MAX, 0.0); 1 << len];
        for (j, e) in basis.iter().enumerate() {
            for (i, w) in e.entries() {
                slot[i] = (j as u32, w);
            }
        }
        let terms = h
            .terms()
            .iter()
            .map(|t| (t.string.x_mask(), t.string.z_mask(), pauli_phase(t.string.y_count()) * t.coefficient))
            .collect();
        SectorOperator { h, basis, slot, terms }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Nonzero entries of row `i`, unsorted and possibly repeated.
    fn row(&self, i: usize, out: &mut Vec<(usize, C64)>) {
        out.clear();
        for (c, w) in self.basis[i].entries() {
            for &(x, z, coef) in &self.terms {
                let b = c ^ x as usize;
                let (j, wb) = self.slot[b];
                if j == u32::MAX {
                    continue;
                }
                let sign = if (b as u64 & z).count_ones() & 1 == 1 { -1.0 } else { 1.0 };
                out.push((j as usize, coef * (w * wb * sign)));
            }
        }
    }

    fn apply(&self, x: &[C64], y: &mut [C64]) {
        y.par_chunks_mut(crate::par::BLOCK).enumerate().for_each(|(blk, chunk)| {
            let mut row = Vec::new();
            for (off, yi) in chunk.iter_mut().enumerate() {
                self.row(blk * crate::par::BLOCK + off, &mut row);
                *yi = row.iter().map(|&(j, v)| v * x[j]).sum();
            }
        });
    }

    fn dense(&self) -> DMatrix<C64> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        let mut row = Vec::new();
        for i in 0..n {
            self.row(i, &mut row);
            for &(j, v) in &row {
                m[(i, j)] += v;
            }
        }
        m
    }

    fn embed(&self, x: &[C64]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 1 << self.h.len()];
        for (e, &c) in self.basis.iter().zip(x) {
            e.scatter(c, &mut v);
        }
        v
    }
}

fn pauli_phase(y: u32) -> C64 {
    match y % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    }
}

struct Eigenpairs {
    values: Vec<f64>,
    vectors: Vec<Vec<C64>>,
    iterations: usize,
    method: SolverMethod,
}

fn solve_sector(
    op: &SectorOperator<'_>,
    k: usize,
    want_vectors: bool,
    opts: &SolverOptions,
    stream: u64,
) -> Result<Eigenpairs> {
    let n = op.dim();
    let k = k.min(n);
    let dense = match opts.method {
        SolverMethod::Dense => {
            if n > DENSE_HARD_LIMIT {
                return Err(Error::InvalidArgument(format!(
                    "dense solver limited to sector dimension {DENSE_HARD_LIMIT}, got {n}"
                )));
            }
            true
        }
        SolverMethod::Lanczos => n <= 2,
        SolverMethod::Auto => n <= opts.dense_max_dimension,
    };
    if dense {
        dense_lowest(op, k, want_vectors)
    } else {
        lanczos_lowest(op, k, opts, stream)
    }
}

fn dense_lowest(op: &SectorOperator<'_>, k: usize, want_vectors: bool) -> Result<Eigenpairs> {
    let m = op.dense();
    let real = m.iter().all(|c| c.im == 0.0);
    let (values, vectors) = if real {
        let mr = m.map(|c| c.re);
        if want_vectors {
            let eig = SymmetricEigen::new(mr);
            let order = sorted_order(eig.eigenvalues.as_slice());
            let vals = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
            let vecs = order
                .iter()
                .take(k)
                .map(|&i| eig.eigenvectors.column(i).iter().map(|&a| C64::new(a, 0.0)).collect())
                .collect();
            (vals, vecs)
        } else {
            let mut ev: Vec<f64> = mr.symmetric_eigenvalues().iter().copied().collect();
            ev.sort_by(f64::total_cmp);
            ev.truncate(k);
            (ev, Vec::new())
        }
    } else {
        let eig = SymmetricEigen::new(m);
        let order = sorted_order(eig.eigenvalues.as_slice());
        let vals = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
        let vecs = if want_vectors {
            order
                .iter()
                .take(k)
                .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
                .collect()
        } else {
            Vec::new()
        };
        (vals, vecs)
    };
    Ok(Eigenpairs {
        values,
        vectors,
        iterations: 0,
        method: SolverMethod::Dense,
    })
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    idx
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    crate::state::inner(a, b)
}

fn norm(a: &[C64]) -> f64 {
    crate::state::norm(a)
}

fn axpy(y: &mut [C64], alpha: C64, x: &[C64]) {
    y.par_chunks_mut(crate::par::BLOCK).enumerate().for_each(|(blk, chunk)| {
        let base = blk * crate::par::BLOCK;
        for (off, v) in chunk.iter_mut().enumerate() {
            *v += alpha * x[base + off];
        }
    });
}

fn scale(y: &mut [C64], alpha: f64) {
    y.par_iter_mut().for_each(|v| *v *= alpha);
}

/// Two passes of classical Gram–Schmidt against `locked` and `basis`.
fn orthogonalize(v: &mut [C64], locked: &[Vec<C64>], basis: &[Vec<C64>]) {
    for _ in 0..2 {
        for q in locked.iter().chain(basis) {
            let c = dot(q, v);
            axpy(v, -c, q);
        }
    }
}

/// Lowest `k` eigenpairs; each is found by a fresh Lanczos run in the
/// orthogonal complement of the ones already locked.
fn lanczos_lowest(op: &SectorOperator<'_>, k: usize, opts: &SolverOptions, stream: u64) -> Result<Eigenpairs> {
    let n = op.dim();
    let mut locked: Vec<Vec<C64>> = Vec::new();
    let mut values = Vec::new();
    let mut iterations = 0;
    for round in 0..k {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(stream * 64 + round as u64);
        let mut v: Vec<C64> = (0..n)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        orthogonalize(&mut v, &locked, &[]);
        let nv = norm(&v);
        if nv == 0.0 {
            break;
        }
        scale(&mut v, 1.0 / nv);
        let (theta, x, its) = lanczos_one(op, v, &locked, opts)?;
        iterations += its;
        values.push(theta);
        locked.push(x);
    }
    Ok(Eigenpairs {
        values,
        vectors: locked,
        iterations,
        method: SolverMethod::Lanczos,
    })
}

fn lanczos_one(
    op: &SectorOperator<'_>,
    start: Vec<C64>,
    locked: &[Vec<C64>],
    opts: &SolverOptions,
) -> Result<(f64, Vec<C64>, usize)> {
    let n = op.dim();
    let room = n - locked.len();
    let mut basis: Vec<Vec<C64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut last_residual = f64::INFINITY;
    let mut scale_h: f64 = 1.0;
    for it in 1..=opts.max_iterations {
        let q = basis.last().unwrap();
        op.apply(q, &mut w);
        let a = dot(q, &w).re;
        alpha.push(a);
        scale_h = scale_h.max(a.abs());
        orthogonalize(&mut w, locked, &basis);
        let b = norm(&w);
        scale_h = scale_h.max(b);
        // An invariant subspace or the whole complement has been spanned.
        let exhausted = b <= 1e-12 * scale_h || basis.len() >= room;
        if exhausted || it % 4 == 0 || it == opts.max_iterations {
            let (theta, s) = tridiagonal_lowest(&alpha, &beta);
            let estimate = b * s[s.len() - 1].abs();
            if exhausted || estimate < opts.tolerance * 0.1 {
                let mut x = ritz_vector(&basis, &s);
                orthogonalize(&mut x, locked, &[]);
                let nx = norm(&x);
                scale(&mut x, 1.0 / nx);
                let residual = sector_residual(op, &x, theta);
                if residual <= opts.tolerance {
                    return Ok((theta, x, it));
                }
                last_residual = residual;
                if exhausted {
                    break;
                }
            } else {
                last_residual = estimate;
            }
        }
        beta.push(b);
        scale(&mut w, 1.0 / b);
        basis.push(std::mem::replace(&mut w, vec![C64::new(0.0, 0.0); n]));
    }
    Err(Error::NoConvergence {
        iterations: alpha.len(),
        residual: last_residual,
    })
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let i = sorted_order(eig.eigenvalues.as_slice())[0];
    (eig.eigenvalues[i], eig.eigenvectors.column(i).iter().copied().collect())
}

fn ritz_vector(basis: &[Vec<C64>], s: &[f64]) -> Vec<C64> {
    let mut x = vec![C64::new(0.0, 0.0); basis[0].len()];
    for (q, &c) in basis.iter().zip(s) {
        axpy(&mut x, C64::new(c, 0.0), q);
    }
    x
}

fn sector_residual(op: &SectorOperator<'_>, x: &[C64], theta: f64) -> f64 {
    let mut hx = vec![C64::new(0.0, 0.0); x.len()];
    op.apply(x, &mut hx);
    ordered_sum(x.len(), |i| (hx[i] - x[i] * theta).norm_sqr()).sqrt()
}

fn check_len(h: &HamiltonianOperator) -> Result<()> {
    if h.len() > MAX_SOLVER_SITES {
        return Err(Error::TooManySites {
            what: "eigensolver",
            length: h.len(),
            limit: MAX_SOLVER_SITES,
        });
    }
    Ok(())
}

/// Makes the largest-magnitude amplitude real and positive. Among amplitudes
/// within `1e-12` of the largest magnitude, the lowest index wins.
pub fn fix_phase(amps: &mut [C64]) {
    let max = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = amps.iter().position(|a| a.norm() >= max - PHASE_TIE).unwrap();
    let a = amps[pivot];
    let rot = a.conj() / a.norm();
    for v in amps.iter_mut() {
        *v *= rot;
    }
    amps[pivot] = C64::new(amps[pivot].norm(), 0.0);
}

/// Lowest eigenpair of `h`, with degeneracy handling and a fixed phase.
pub fn ground_state(h: &HamiltonianOperator, opts: &SolverOptions) -> Result<GroundStateResult> {
    opts.validate()?;
    check_len(h)?;
    let sectors: Vec<Sector> = h
        .sectors()
        .decomposition
        .iter()
        .copied()
        .filter(|s| s.dimension(h.len()) > 0)
        .collect();
    // Solve every sector for its two lowest levels; vectors only where needed.
    let target = sectors[0];
    let solved = sectors
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let op = SectorOperator::new(h, s);
            solve_sector(&op, 2, s == target, opts, i as u64)
        })
        .collect::<Vec<_>>();
    let solved = solved.into_iter().collect::<Result<Vec<_>>>()?;
    let mut all: Vec<f64> = solved.iter().flat_map(|e| e.values.iter().copied()).collect();
    all.sort_by(f64::total_cmp);
    let e0 = all[0];
    let gap = if all.len() > 1 { (all[1] - e0).max(0.0) } else { f64::INFINITY };
    let thr = opts.threshold(e0);
    let mut iterations: usize = solved.iter().map(|e| e.iterations).sum();

    let chosen = solved
        .iter()
        .position(|e| e.values[0] <= e0 + thr)
        .unwrap_or(0);
    let sector = sectors[chosen];
    let op = SectorOperator::new(h, sector);
    let mut pairs = if chosen == 0 {
        solved.into_iter().next().unwrap()
    } else {
        let p = solve_sector(&op, 2, true, opts, chosen as u64)?;
        iterations += p.iterations;
        p
    };
    let method = pairs.method;
    let inner_gap = if pairs.values.len() > 1 {
        pairs.values[1] - pairs.values[0]
    } else {
        f64::INFINITY
    };
    let mut tie_break_applied = false;
    let mut x = std::mem::take(&mut pairs.vectors[0]);
    if inner_gap < thr && !h.tie_break().is_empty() && opts.degeneracy_epsilon > 0.0 {
        let hp = h.perturbed(opts.degeneracy_epsilon);
        let opp = SectorOperator::new(&hp, sector);
        let p = solve_sector(&opp, 1, true, opts, chosen as u64)?;
        iterations += p.iterations;
        x = p.vectors.into_iter().next().unwrap();
        tie_break_applied = true;
    }
    let mut amps = op.embed(&x);
    let nrm = norm(&amps);
    amps.iter_mut().for_each(|a| *a /= nrm);
    fix_phase(&mut amps);

    let mut hv = vec![C64::new(0.0, 0.0); amps.len()];
    h.apply_into(&amps, &mut hv);
    let energy = crate::state::inner(&amps, &hv).re;
    let residual = ordered_sum(amps.len(), |i| (hv[i] - amps[i] * energy).norm_sqr()).sqrt();
    Ok(GroundStateResult {
        energy,
        state: StateVector::from_normalized(amps, h.len()),
        gap,
        degenerate: gap < thr,
        iterations,
        residual,
        method,
        sector,
        seed: opts.seed,
        tie_break_applied,
    })
}

/// The `k` lowest eigenvalues of `h` over the whole Hilbert space, ascending.
pub fn low_spectrum(h: &HamiltonianOperator, k: usize, opts: &SolverOptions) -> Result<Vec<f64>> {
    opts.validate()?;
    check_len(h)?;
    if k > 1 << h.len() {
        return Err(Error::InvalidArgument(format!(
            "asked for {k} levels of a {}-dimensional space",
            1usize << h.len()
        )));
    }
    let sectors: Vec<Sector> = h.sectors().decomposition.clone();
    let parts = sectors
        .par_iter()
        .enumerate()
        .filter(|(_, s)| s.dimension(h.len()) > 0)
        .map(|(i, &s)| solve_sector(&SectorOperator::new(h, s), k, false, opts, i as u64))
        .collect::<Vec<_>>();
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?.values);
    }
    all.sort_by(f64::total_cmp);
    all.truncate(k);
    Ok(all)
}
