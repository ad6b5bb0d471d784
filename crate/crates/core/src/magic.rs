//! Stabilizer Rényi entropy
//!
//! `M_α(ψ) = 1/(1−α) · log₂( Σ_P ⟨ψ|P|ψ⟩^{2α} / 2^L )`, summed over all `4^L`
//! Pauli strings. For `α = 1` the Shannon limit `−Σ Ξ_P log₂ Ξ_P − L` with
//! `Ξ_P = ⟨P⟩²/2^L` is used.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::par::{pairwise_sum, prelude::*};
use crate::pauli::{enumerate_paulis, PauliString};
use crate::state::{StateVector, C64};

/// Largest chain accepted by [`sre_direct`].
pub const MAX_DIRECT_SITES: usize = 8;

/// Default guard for the transform evaluators (`4^13` reals ≈ 537 MB).
pub const DEFAULT_TRANSFORM_SITES: usize = 13;

/// Hard ceiling for the transform guard.
pub const MAX_TRANSFORM_SITES: usize = 16;

const NORM_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SreMethod {
    Direct,
    #[serde(alias = "exhaustive")]
    Transform,
    #[serde(alias = "mc", alias = "monte-carlo")]
    MonteCarlo,
}

impl SreMethod {
    pub fn name(self) -> &'static str {
        match self {
            SreMethod::Direct => "direct",
            SreMethod::Transform => "transform",
            SreMethod::MonteCarlo => "montecarlo",
        }
    }

    pub fn is_exact(self) -> bool {
        self != SreMethod::MonteCarlo
    }

    /// Largest chain the method accepts with the given transform guard.
    pub fn max_sites(self, transform_limit: usize) -> usize {
        match self {
            SreMethod::Direct => MAX_DIRECT_SITES,
            SreMethod::Transform => transform_limit,
            SreMethod::MonteCarlo => StateVector::MAX_SITES,
        }
    }
}

impl fmt::Display for SreMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SreMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(SreMethod::Direct),
            "transform" | "exhaustive" => Ok(SreMethod::Transform),
            "montecarlo" | "monte-carlo" | "mc" => Ok(SreMethod::MonteCarlo),
            _ => Err(Error::InvalidArgument(format!("unknown SRE method {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SreEstimate {
    pub alpha: f64,
    /// In bits.
    pub value: f64,
    pub method: SreMethod,
    /// Zero for exact methods.
    pub std_error: f64,
    /// Monte Carlo samples pooled over all chains.
    pub samples: Option<usize>,
    /// `Σ_P ⟨P⟩² / 2^L`, exact methods only.
    pub purity_check: Option<f64>,
    pub seed: Option<u64>,
    pub acceptance_rate: Option<f64>,
    pub warnings: Vec<String>,
}

impl SreEstimate {
    fn exact(alpha: f64, value: f64, method: SreMethod, purity: f64) -> Self {
        SreEstimate {
            alpha,
            value: value + 0.0,
            method,
            std_error: 0.0,
            samples: None,
            purity_check: Some(purity),
            seed: None,
            acceptance_rate: None,
            warnings: Vec::new(),
        }
    }
}

/// `⟨P⟩` for every Pauli string, at `index(P)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliSpectrum {
    values: Vec<f64>,
    len: usize,
}

impl PauliSpectrum {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, p: &PauliString) -> f64 {
        self.values[p.index() as usize]
    }

    /// `Σ_P ⟨P⟩²`, which is `2^L` for a pure state.
    pub fn purity_sum(&self) -> f64 {
        let sq: Vec<f64> = self
            .values
            .par_chunks(1 << self.len)
            .map(|row| pairwise_sum(&row.iter().map(|v| v * v).collect::<Vec<_>>()))
            .collect();
        pairwise_sum(&sq)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be a finite number >= 1, got {alpha}")));
    }
    Ok(())
}

fn check_sites(s: &StateVector, what: &'static str, limit: usize) -> Result<()> {
    if s.len() > limit {
        return Err(Error::TooManySites {
            what,
            length: s.len(),
            limit,
        });
    }
    s.check_normalized(NORM_TOL)
}

/// `g(⟨P⟩)` summed by the evaluators: `⟨P⟩^{2α}`, or `⟨P⟩² log₂ ⟨P⟩²` at `α = 1`.
fn moment(v: f64, alpha: f64) -> f64 {
    let sq = v * v;
    if alpha == 1.0 {
        if sq == 0.0 {
            0.0
        } else {
            sq * sq.log2()
        }
    } else if alpha == 2.0 {
        sq * sq
    } else {
        sq.powf(alpha)
    }
}

/// Turns `Σ g(⟨P⟩)` into `M_α`.
fn finish(sum: f64, alpha: f64, len: usize) -> f64 {
    let l = len as f64;
    if alpha == 1.0 {
        // Ξ = v²/2^L ⇒ −Σ Ξ log₂ Ξ − L = L − Σ v² log₂ v² / 2^L − L.
        -sum / 2f64.powi(len as i32)
    } else {
        ((sum).log2() - l) / (1.0 - alpha)
    }
}

/// Literal evaluation of the definition, one expectation value per string.
pub fn sre_direct(s: &StateVector, alpha: f64) -> Result<SreEstimate> {
    check_alpha(alpha)?;
    check_sites(s, "direct SRE", MAX_DIRECT_SITES)?;
    let strings: Vec<PauliString> = enumerate_paulis(s.len())?.collect();
    let values = strings
        .par_iter()
        .map(|p| p.expectation(s))
        .collect::<Result<Vec<f64>>>()?;
    let g: Vec<f64> = values.iter().map(|&v| moment(v, alpha)).collect();
    let sq: Vec<f64> = values.iter().map(|&v| v * v).collect();
    let purity = pairwise_sum(&sq) / 2f64.powi(s.len() as i32);
    Ok(SreEstimate::exact(alpha, finish(pairwise_sum(&g), alpha, s.len()), SreMethod::Direct, purity))
}

fn walsh_hadamard(v: &mut [C64]) {
    let n = v.len();
    let mut h = 1;
    while h < n {
        for block in v.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
}

/// `⟨P(x, z)⟩` for every `z`, written into `out`.
///
/// With `f[b] = conj(ψ[b⊕x])·ψ[b]`, `⟨P(x,z)⟩ = i^{|x∧z|} Σ_b (−1)^{b·z} f[b]`,
/// so one Walsh–Hadamard transform of `f` yields the whole row.
fn spectrum_row(amps: &[C64], x: usize, scratch: &mut Vec<C64>, out: &mut [f64]) -> f64 {
    scratch.clear();
    scratch.extend(amps.iter().enumerate().map(|(b, a)| amps[b ^ x].conj() * a));
    walsh_hadamard(scratch);
    let mut worst: f64 = 0.0;
    for (z, (o, f)) in out.iter_mut().zip(scratch.iter()).enumerate() {
        let v = match (x & z).count_ones() % 4 {
            0 => *f,
            1 => *f * C64::new(0.0, 1.0),
            2 => -*f,
            _ => *f * C64::new(0.0, -1.0),
        };
        worst = worst.max(v.im.abs());
        *o = v.re;
    }
    worst
}

pub fn pauli_spectrum_transform(s: &StateVector) -> Result<PauliSpectrum> {
    pauli_spectrum_transform_limited(s, DEFAULT_TRANSFORM_SITES)
}

/// As [`pauli_spectrum_transform`] with an explicit site guard.
pub fn pauli_spectrum_transform_limited(s: &StateVector, limit: usize) -> Result<PauliSpectrum> {
    check_sites(s, "Pauli spectrum transform", limit.min(MAX_TRANSFORM_SITES))?;
    let dim = s.dim();
    let amps = s.amplitudes();
    let mut values = vec![0.0; dim * dim];
    let worst = values
        .par_chunks_mut(dim)
        .enumerate()
        .map(|(x, row)| spectrum_row(amps, x, &mut Vec::with_capacity(dim), row))
        .reduce_max();
    if worst > IMAG_TOL {
        return Err(Error::ImaginaryResidual(worst));
    }
    Ok(PauliSpectrum { values, len: s.len() })
}

trait ReduceMax {
    fn reduce_max(self) -> f64;
}

#[cfg(feature = "parallel")]
impl<I: ParallelIterator<Item = f64>> ReduceMax for I {
    fn reduce_max(self) -> f64 {
        self.reduce(|| 0.0, f64::max)
    }
}

#[cfg(not(feature = "parallel"))]
impl<I: Iterator<Item = f64>> ReduceMax for I {
    fn reduce_max(self) -> f64 {
        self.fold(0.0, f64::max)
    }
}

pub fn sre_exhaustive(s: &StateVector, alpha: f64) -> Result<SreEstimate> {
    sre_exhaustive_limited(s, alpha, DEFAULT_TRANSFORM_SITES)
}

/// Exact `M_α` from the transform, streamed one row of `2^L` strings at a
/// time. Row sums are pairwise, and rows are combined pairwise in row order, so
/// the result does not depend on the thread count.
pub fn sre_exhaustive_limited(s: &StateVector, alpha: f64, limit: usize) -> Result<SreEstimate> {
    check_alpha(alpha)?;
    check_sites(s, "exhaustive SRE (use Monte Carlo above this size)", limit.min(MAX_TRANSFORM_SITES))?;
    let dim = s.dim();
    let amps = s.amplitudes();
    let rows: Vec<(f64, f64, f64)> = (0..dim)
        .into_par_iter()
        .map(|x| {
            let mut scratch = Vec::with_capacity(dim);
            let mut row = vec![0.0; dim];
            let worst = spectrum_row(amps, x, &mut scratch, &mut row);
            let g: Vec<f64> = row.iter().map(|&v| moment(v, alpha)).collect();
            row.iter_mut().for_each(|v| *v *= *v);
            (pairwise_sum(&g), pairwise_sum(&row), worst)
        })
        .collect();
    let worst = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    if worst > IMAG_TOL {
        return Err(Error::ImaginaryResidual(worst));
    }
    let g: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let sq: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let purity = pairwise_sum(&sq) / dim as f64;
    Ok(SreEstimate::exact(alpha, finish(pairwise_sum(&g), alpha, s.len()), SreMethod::Transform, purity))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChainOptions {
    /// Recorded samples per chain.
    pub samples: usize,
    /// Discarded steps before recording; `None` means `50·L`.
    pub burn_in: Option<usize>,
    pub thinning: usize,
    pub bins: usize,
    pub seed: u64,
    /// Independent chains, seeded `seed, seed+1, …`, pooled into one estimate.
    pub chains: usize,
    /// Fraction of proposals that resample two distinct sites instead of one.
    /// Single-site moves cannot leave the identity string when every
    /// one-site expectation vanishes (e.g. U(1)-symmetric states).
    pub pair_moves: f64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        ChainOptions {
            samples: 100_000,
            burn_in: None,
            thinning: 1,
            bins: 50,
            seed: 1,
            chains: 1,
            pair_moves: 0.0,
        }
    }
}

impl ChainOptions {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 || self.bins < 2 || self.chains == 0 {
            return Err(Error::InvalidArgument(
                "Monte Carlo needs thinning >= 1, bins >= 2 and chains >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.pair_moves) {
            return Err(Error::InvalidArgument(format!(
                "pair_moves must lie in [0, 1], got {}",
                self.pair_moves
            )));
        }
        if self.samples < self.bins {
            return Err(Error::InvalidArgument(format!(
                "Monte Carlo needs at least one sample per bin ({} samples, {} bins)",
                self.samples, self.bins
            )));
        }
        Ok(())
    }
}

fn expectation_seq(amps: &[C64], x: usize, z: u64, y: u32) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for (c, a) in amps.iter().enumerate() {
        let b = c ^ x;
        let t = a.conj() * amps[b];
        if (b as u64 & z).count_ones() & 1 == 1 {
            acc -= t;
        } else {
            acc += t;
        }
    }
    match y % 4 {
        0 => acc.re,
        1 => -acc.im,
        2 => -acc.re,
        _ => acc.im,
    }
}

struct ChainRun {
    bin_means: Vec<f64>,
    total: f64,
    count: usize,
    frozen: bool,
    accepted: usize,
    proposed: usize,
}

/// Replaces the Pauli on `site` with one of the other three.
fn resample(x: u64, z: u64, site: usize, rng: &mut ChaCha8Rng) -> (u64, u64) {
    let bit = 1u64 << site;
    let cur = ((x & bit) != 0) as u8 * 2 + ((z & bit) != 0) as u8;
    let next = (cur + rng.random_range(1..4u8)) % 4;
    let nx = if next & 2 != 0 { x | bit } else { x & !bit };
    let nz = if next & 1 != 0 { z | bit } else { z & !bit };
    (nx, nz)
}

/// Chain over the non-identity strings with weight `⟨P⟩²`, started at the
/// identity. Samples taken before the first accepted move are dropped.
fn run_chain(s: &StateVector, opts: &ChainOptions, seed: u64) -> ChainRun {
    let len = s.len();
    let amps = s.amplitudes();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut x, mut z) = (0u64, 0u64);
    let weight = |x: u64, z: u64| {
        if x == 0 && z == 0 {
            return 0.0;
        }
        let v = expectation_seq(amps, x as usize, z, (x & z).count_ones());
        v * v
    };
    let mut w = 0.0;
    let burn_in = opts.burn_in.unwrap_or(50 * len);
    let step = |rng: &mut ChaCha8Rng, x: &mut u64, z: &mut u64, w: &mut f64| {
        let site = rng.random_range(0..len);
        let (mut nx, mut nz) = resample(*x, *z, site, rng);
        if opts.pair_moves > 0.0 && len > 1 && rng.random::<f64>() < opts.pair_moves {
            let other = (site + rng.random_range(1..len)) % len;
            (nx, nz) = resample(nx, nz, other, rng);
        }
        let nw = weight(nx, nz);
        let accept = rng.random::<f64>() * *w < nw;
        if accept {
            *x = nx;
            *z = nz;
            *w = nw;
        }
        accept as usize
    };
    let mut accepted = 0;
    for _ in 0..burn_in {
        accepted += step(&mut rng, &mut x, &mut z, &mut w);
    }
    let settled = accepted;
    let mut recorded = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        for _ in 0..opts.thinning {
            accepted += step(&mut rng, &mut x, &mut z, &mut w);
        }
        if w > 0.0 {
            recorded.push(w);
        }
    }
    let size = recorded.len() / opts.bins;
    let bin_means = if size == 0 {
        Vec::new()
    } else {
        recorded
            .chunks_exact(size)
            .take(opts.bins)
            .map(|c| pairwise_sum(c) / size as f64)
            .collect()
    };
    ChainRun {
        bin_means,
        total: pairwise_sum(&recorded),
        count: recorded.len(),
        frozen: accepted == settled,
        accepted,
        proposed: burn_in + opts.samples * opts.thinning,
    }
}

/// `M₂` from a Metropolis chain over Pauli strings with weight `⟨P⟩²`.
///
/// With `Ξ_P = ⟨P⟩²/2^L`, `M₂ = −log₂ E_Ξ[⟨P⟩²]`. The identity carries
/// `Ξ_I = 2^−L` and `⟨I⟩² = 1` exactly, so it is split off:
/// `E_Ξ[⟨P⟩²] = 2^−L + (1 − 2^−L)·E_Ξ'[⟨P⟩²]` where `Ξ'` is `Ξ` restricted to
/// the other strings, the target of the chain.
pub fn sre_monte_carlo(s: &StateVector, opts: &ChainOptions) -> Result<SreEstimate> {
    opts.validate()?;
    s.check_normalized(NORM_TOL)?;
    let runs: Vec<ChainRun> = (0..opts.chains)
        .into_par_iter()
        .map(|c| run_chain(s, opts, opts.seed.wrapping_add(c as u64)))
        .collect();
    let count: usize = runs.iter().map(|r| r.count).sum();
    let bins: Vec<f64> = runs.iter().flat_map(|r| r.bin_means.iter().copied()).collect();
    if runs.iter().any(|r| r.frozen) {
        return Err(Error::Sampling(
            "a chain accepted no move after burn-in; single-site moves cannot explore this \
             state's Pauli support (try pair_moves > 0)"
                .into(),
        ));
    }
    if bins.len() < 2 {
        return Err(Error::Sampling(format!(
            "only {count} samples away from the identity string; single-site moves cannot reach \
             this state's Pauli support (try pair_moves > 0)"
        )));
    }
    let totals: Vec<f64> = runs.iter().map(|r| r.total).collect();
    let rest = pairwise_sum(&totals) / count as f64;
    let nb = bins.len() as f64;
    let bin_mean = pairwise_sum(&bins) / nb;
    let dev: Vec<f64> = bins.iter().map(|b| (b - bin_mean).powi(2)).collect();
    let sem = (pairwise_sum(&dev) / (nb - 1.0) / nb).sqrt();
    let xi_id = 0.5f64.powi(s.len() as i32);
    let mean = xi_id + (1.0 - xi_id) * rest;
    let accepted: usize = runs.iter().map(|r| r.accepted).sum();
    let proposed: usize = runs.iter().map(|r| r.proposed).sum();
    let rate = accepted as f64 / proposed.max(1) as f64;
    let mut warnings = Vec::new();
    if !(0.01..=0.99).contains(&rate) {
        warnings.push(format!("acceptance rate {rate:.4} outside [0.01, 0.99]"));
    }
    Ok(SreEstimate {
        alpha: 2.0,
        value: -mean.log2() + 0.0,
        method: SreMethod::MonteCarlo,
        std_error: (1.0 - xi_id) * sem / (mean * std::f64::consts::LN_2),
        samples: Some(count),
        purity_check: None,
        seed: Some(opts.seed),
        acceptance_rate: Some(rate),
        warnings,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SreOptions {
    pub method: SreMethod,
    pub alpha: f64,
    pub transform_limit: usize,
    pub chain: ChainOptions,
}

impl Default for SreOptions {
    fn default() -> Self {
        SreOptions {
            method: SreMethod::Transform,
            alpha: 2.0,
            transform_limit: DEFAULT_TRANSFORM_SITES,
            chain: ChainOptions::default(),
        }
    }
}

impl SreOptions {
    /// Rejects combinations that would fail before any state is built.
    pub fn validate_for(&self, len: usize) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.transform_limit > MAX_TRANSFORM_SITES {
            return Err(Error::InvalidArgument(format!(
                "transform_limit is capped at {MAX_TRANSFORM_SITES}"
            )));
        }
        if self.method == SreMethod::MonteCarlo {
            self.chain.validate()?;
            if self.alpha != 2.0 {
                return Err(Error::InvalidArgument("Monte Carlo supports alpha = 2 only".into()));
            }
        }
        let limit = self.method.max_sites(self.transform_limit);
        if len > limit {
            return Err(Error::TooManySites {
                what: match self.method {
                    SreMethod::Direct => "direct SRE",
                    SreMethod::Transform => "exhaustive SRE (use Monte Carlo above this size)",
                    SreMethod::MonteCarlo => "Monte Carlo SRE",
                },
                length: len,
                limit,
            });
        }
        Ok(())
    }
}

/// Evaluates `M_α` with the configured method.
pub fn sre(s: &StateVector, opts: &SreOptions) -> Result<SreEstimate> {
    opts.validate_for(s.len())?;
    match opts.method {
        SreMethod::Direct => sre_direct(s, opts.alpha),
        SreMethod::Transform => sre_exhaustive_limited(s, opts.alpha, opts.transform_limit),
        SreMethod::MonteCarlo => sre_monte_carlo(s, &opts.chain),
    }
}
