//! Magic in rotated local bases.
//!
//! Each site gets `R = Rz(φ)·Ry(θ)·Rz(λ)` with `Rz(a) = diag(e^{−ia/2}, e^{ia/2})`
//! and `Ry(θ) = [[cos θ/2, −sin θ/2], [sin θ/2, cos θ/2]]`. Angles are stored
//! per site in the order `(θ, φ, λ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::magic::sre_exhaustive;
use crate::par::prelude::*;
use crate::state::{Gate, StateVector, C64};

/// Largest chain accepted by [`minimize_basis_magic`].
pub const MAX_SEARCH_SITES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalBasis {
    angles: Vec<f64>,
}

impl LocalBasis {
    /// Wraps every angle into `[0, 2π)`.
    pub fn new(angles: Vec<f64>) -> Result<Self> {
        if angles.is_empty() || !angles.len().is_multiple_of(3) {
            return Err(Error::InvalidArgument(format!(
                "a local basis needs 3 angles per site, got {}",
                angles.len()
            )));
        }
        if let Some(a) = angles.iter().find(|a| !a.is_finite()) {
            return Err(Error::InvalidArgument(format!("angle {a} is not finite")));
        }
        let angles = angles
            .into_iter()
            .map(|a| {
                let w = a.rem_euclid(TAU);
                if w >= TAU {
                    0.0
                } else {
                    w
                }
            })
            .collect();
        Ok(LocalBasis { angles })
    }

    /// The computational basis.
    pub fn identity(len: usize) -> Self {
        LocalBasis {
            angles: vec![0.0; 3 * len],
        }
    }

    pub fn len(&self) -> usize {
        self.angles.len() / 3
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn is_identity(&self) -> bool {
        self.angles.iter().all(|&a| a == 0.0)
    }

    pub fn gates(&self) -> Vec<Gate> {
        self.angles.chunks(3).map(|a| rotation(a[0], a[1], a[2])).collect()
    }
}

/// `Rz(φ)·Ry(θ)·Rz(λ)`.
pub fn rotation(theta: f64, phi: f64, lambda: f64) -> Gate {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let e = |a: f64| C64::from_polar(1.0, a / 2.0);
    [
        [e(-phi - lambda) * c, -e(-phi + lambda) * s],
        [e(phi - lambda) * s, e(phi + lambda) * c],
    ]
}

/// `M_α` of `(⊗ᵢ Rᵢ)|s⟩`. The all-zero basis evaluates `s` itself.
pub fn rotated_sre(s: &StateVector, b: &LocalBasis, alpha: f64) -> Result<f64> {
    if b.len() != s.len() {
        return Err(Error::LengthMismatch {
            expected: s.len(),
            found: b.len(),
        });
    }
    if b.is_identity() {
        return Ok(sre_exhaustive(s, alpha)?.value);
    }
    let rotated = s.apply_local(&b.gates())?;
    Ok(sre_exhaustive(&rotated, alpha)?.value)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_evaluations: usize,
    /// Stop when every vertex is this close to the best one.
    pub simplex_tolerance: f64,
    /// Edge length of the initial simplex, in radians.
    pub initial_step: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        OptimizerOptions {
            restarts: 20,
            max_evaluations: 5000,
            simplex_tolerance: 1e-7,
            initial_step: 0.4,
            alpha: 2.0,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub index: usize,
    /// Seed of the random start; `None` for the zero-angle start.
    pub start_seed: Option<u64>,
    pub start_value: f64,
    pub final_value: f64,
    pub evaluations: usize,
    pub converged: bool,
    pub basis: LocalBasis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasisSearch {
    pub best: LocalBasis,
    pub value: f64,
    /// `M_α` in the computational basis.
    pub zero_value: f64,
    pub restarts: Vec<RestartRecord>,
}

struct Outcome {
    x: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Nelder–Mead with the standard coefficients (1, 2, ½, ½).
fn nelder_mead<F>(f: F, start: &[f64], step: f64, tol: f64, budget: usize) -> Result<Outcome>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let n = start.len();
    let evaluations = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evaluations.set(evaluations.get() + 1);
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start)?));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += step;
        let v = eval(&x)?;
        simplex.push((x, v));
    }
    let mut converged = false;
    while evaluations.get() < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0].0;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(best).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if diameter < tol {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&worst.0).map(|(c, w)| c + t * (w - c)).collect() };
        let xr = along(-1.0);
        let fr = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = along(-0.5);
                let v = eval(&x)?;
                (x, v)
            } else {
                let x = along(0.5);
                let v = eval(&x)?;
                (x, v)
            };
            if fc < worst.1.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let x0 = simplex[0].0.clone();
                for (x, v) in simplex.iter_mut().skip(1) {
                    for (xi, bi) in x.iter_mut().zip(&x0) {
                        *xi = bi + 0.5 * (*xi - bi);
                    }
                    *v = eval(x)?;
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(Outcome {
        x,
        value,
        evaluations: evaluations.get(),
        converged,
    })
}

/// Multi-start Nelder–Mead over the `3L` rotation angles. Restart 0 starts
/// from the computational basis, the others from seeded uniform angles.
pub fn minimize_basis_magic(s: &StateVector, opts: &OptimizerOptions) -> Result<BasisSearch> {
    if s.len() > MAX_SEARCH_SITES {
        return Err(Error::TooManySites {
            what: "basis search",
            length: s.len(),
            limit: MAX_SEARCH_SITES,
        });
    }
    if opts.restarts == 0 || opts.max_evaluations == 0 {
        return Err(Error::InvalidArgument("basis search needs restarts >= 1 and max_evaluations >= 1".into()));
    }
    let n = 3 * s.len();
    let objective = |x: &[f64]| rotated_sre(s, &LocalBasis::new(x.to_vec())?, opts.alpha);
    let zero_value = rotated_sre(s, &LocalBasis::identity(s.len()), opts.alpha)?;
    let records = (0..opts.restarts)
        .into_par_iter()
        .map(|i| {
            let (start, seed) = if i == 0 {
                (vec![0.0; n], None)
            } else {
                let seed = opts.seed.wrapping_add(i as u64);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                ((0..n).map(|_| rng.random_range(0.0..TAU)).collect(), Some(seed))
            };
            let start_value = objective(&start)?;
            let out = nelder_mead(objective, &start, opts.initial_step, opts.simplex_tolerance, opts.max_evaluations)?;
            Ok(RestartRecord {
                index: i,
                start_seed: seed,
                start_value,
                final_value: out.value,
                evaluations: out.evaluations,
                converged: out.converged,
                basis: LocalBasis::new(out.x)?,
            })
        })
        .collect::<Vec<Result<RestartRecord>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (mut best, mut value) = (LocalBasis::identity(s.len()), zero_value);
    for r in &records {
        if r.final_value < value {
            value = r.final_value;
            best = r.basis.clone();
        }
    }
    Ok(BasisSearch {
        best,
        value,
        zero_value,
        restarts: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::random_state;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn rotation_is_unitary() {
        let g = rotation(0.3, 1.1, -2.0);
        for i in 0..2 {
            for j in 0..2 {
                let dot: C64 = (0..2).map(|k| g[k][i].conj() * g[k][j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - C64::new(want, 0.0)).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn angles_are_wrapped() {
        let b = LocalBasis::new(vec![-FRAC_PI_2, 7.0, TAU]).unwrap();
        assert!((b.angles()[0] - 1.5 * PI).abs() < 1e-15);
        assert!((b.angles()[1] - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(b.angles()[2], 0.0);
        assert!(LocalBasis::new(vec![0.0; 4]).is_err());
    }

    #[test]
    fn zero_angles_are_the_identity() {
        let s = random_state(4, &mut ChaCha8Rng::seed_from_u64(2));
        let direct = sre_exhaustive(&s, 2.0).unwrap().value;
        assert_eq!(rotated_sre(&s, &LocalBasis::identity(4), 2.0).unwrap(), direct);
    }

    #[test]
    fn quarter_turn_about_y() {
        let s = StateVector::zero(1).unwrap();
        let b = LocalBasis::new(vec![FRAC_PI_4, 0.0, 0.0]).unwrap();
        let v = rotated_sre(&s, &b, 2.0).unwrap();
        assert!((v - (4.0f64 / 3.0).log2()).abs() < 1e-10);
    }

    #[test]
    fn clifford_angles_preserve_magic() {
        let s = random_state(3, &mut ChaCha8Rng::seed_from_u64(8));
        let base = sre_exhaustive(&s, 2.0).unwrap().value;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let angles = (0..9).map(|_| FRAC_PI_2 * rng.random_range(0..4) as f64).collect();
            let v = rotated_sre(&s, &LocalBasis::new(angles).unwrap(), 2.0).unwrap();
            assert!((v - base).abs() < 1e-9);
        }
        let ghz = StateVector::ghz(3).unwrap();
        let b = LocalBasis::new(vec![FRAC_PI_2, PI, 0.0, 0.0, FRAC_PI_2, 0.0, PI, 0.0, FRAC_PI_2]).unwrap();
        assert!(rotated_sre(&ghz, &b, 2.0).unwrap().abs() < 1e-9);
    }

    #[test]
    fn nelder_mead_finds_a_quadratic_minimum() {
        let f = |x: &[f64]| Ok((x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2));
        let out = nelder_mead(f, &[0.0, 0.0], 0.5, 1e-9, 5000).unwrap();
        assert!(out.converged);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] + 0.5).abs() < 1e-6);
    }

    #[test]
    fn single_t_state_rotates_to_zero() {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let t = StateVector::product(&[[C64::new(a, 0.0), C64::from_polar(a, FRAC_PI_4)]]).unwrap();
        let opts = OptimizerOptions {
            restarts: 4,
            ..Default::default()
        };
        let r = minimize_basis_magic(&t, &opts).unwrap();
        assert!(r.value < 1e-8, "{}", r.value);
        assert!(r.value <= r.zero_value);
        assert_eq!(r.restarts.len(), 4);
        assert_eq!(r.restarts[0].start_seed, None);
    }

    #[test]
    fn stabilizer_minimum_is_zero_at_zero_angles() {
        let opts = OptimizerOptions {
            restarts: 3,
            max_evaluations: 500,
            ..Default::default()
        };
        let r = minimize_basis_magic(&StateVector::ghz(3).unwrap(), &opts).unwrap();
        assert!(r.zero_value.abs() < 1e-12);
        assert!(r.value >= -1e-10 && r.value <= r.zero_value);
    }
}
