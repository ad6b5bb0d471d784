//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints one PASS/FAIL line; exits non-zero if any fails.

use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use srelab::harness::{run_sweep, write_spectral_report, SweepConfig, SweepResult};
use srelab::*;

type Outcome = std::result::Result<(bool, String), Box<dyn std::error::Error>>;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn archive() -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn ground(kind: ModelKind, len: usize, p: f64, b: Boundary) -> Result<StateVector> {
    let h = build_model(&ModelSpec::new(kind, len, p, b)?)?;
    Ok(ground_state(&h, &SolverOptions::default())?.state)
}

fn m2(s: &StateVector) -> Result<f64> {
    Ok(sre_exhaustive(s, 2.0)?.value)
}

fn delta(kind: ModelKind, len: usize, p: f64, b: Boundary) -> Result<f64> {
    let spec = ModelSpec::new(kind, len, p, b)?;
    Ok(delta_magic(&spec, &DualityOptions::default())?.delta_m2)
}

fn t_state() -> StateVector {
    let w = c(FRAC_1_SQRT_2, 0.0);
    let phase = C64::from_polar(FRAC_1_SQRT_2, std::f64::consts::FRAC_PI_4);
    StateVector::product(&[[w, phase]]).unwrap()
}

fn stabilizer_zeros() -> Outcome {
    let mut worst: (f64, String) = (0.0, String::new());
    let mut check = |name: String, s: StateVector| -> Result<()> {
        let v = m2(&s)?;
        if v.abs() >= worst.0 {
            worst = (v.abs(), name);
        }
        Ok(())
    };
    for l in 1..=10 {
        check(format!("|0>^{l}"), StateVector::zero(l)?)?;
        check(format!("|+>^{l}"), StateVector::plus(l)?)?;
        check(format!("GHZ_{l}"), StateVector::ghz(l)?)?;
    }
    check(
        "cluster-Ising lambda=0 L=8".into(),
        ground(ModelKind::ClusterIsing, 8, 0.0, Boundary::Open)?,
    )?;
    check(
        "dimerized XX delta=-1 L=8".into(),
        ground(ModelKind::DimerizedXx, 8, -1.0, Boundary::Open)?,
    )?;
    Ok((worst.0 < 1e-8, format!("max |M2| = {:.2e} ({}), tol 1e-8", worst.0, worst.1)))
}

fn analytic_t_state() -> Outcome {
    let exact = (4.0f64 / 3.0).log2();
    let t = t_state();
    let one = sre_direct(&t, 2.0)?.value;
    let two = sre_direct(&t.tensor(&t)?, 2.0)?.value;
    let (e1, e2) = ((one - exact).abs(), (two - 2.0 * exact).abs());
    Ok((
        e1 < 1e-12 && e2 < 1e-9,
        format!("|M2(T) - log2(4/3)| = {e1:.1e} (tol 1e-12), |M2(TxT) - 2 log2(4/3)| = {e2:.1e} (tol 1e-9)"),
    ))
}

fn purity_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for l in 2..=10 {
        for _ in 0..20 {
            let s = StateVector::random(l, &mut rng)?;
            let sum = pauli_spectrum_transform(&s)?.purity_sum();
            worst = worst.max((sum - (1u64 << l) as f64).abs());
        }
    }
    Ok((worst < 1e-8, format!("max |sum <P>^2 - 2^L| = {worst:.2e} over 180 states, tol 1e-8")))
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for l in 2..=8 {
        for _ in 0..10 {
            let s = StateVector::random(l, &mut rng)?;
            worst = worst.max((sre_direct(&s, 2.0)?.value - m2(&s)?).abs());
        }
    }
    let mut worst_sigma = 0.0f64;
    for (i, l) in [6, 8, 10].into_iter().enumerate() {
        for k in 0..5 {
            let s = StateVector::random(l, &mut rng)?;
            let opts = ChainOptions {
                seed: 100 + (10 * i + k) as u64,
                ..ChainOptions::default()
            };
            let mc = sre_monte_carlo(&s, &opts)?;
            worst_sigma = worst_sigma.max((mc.value - m2(&s)?).abs() / mc.std_error);
        }
    }
    Ok((
        worst < 1e-10 && worst_sigma < 3.0,
        format!("direct vs transform {worst:.1e} (tol 1e-10); Monte Carlo worst {worst_sigma:.2} sigma (tol 3)"),
    ))
}

fn random_clifford(rng: &mut ChaCha8Rng) -> [[C64; 2]; 2] {
    let h = [[c(FRAC_1_SQRT_2, 0.0), c(FRAC_1_SQRT_2, 0.0)], [c(FRAC_1_SQRT_2, 0.0), c(-FRAC_1_SQRT_2, 0.0)]];
    let s = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]];
    let mul = |a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]| {
        let mut m = [[c(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        m
    };
    let mut g = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    for _ in 0..rng.random_range(0..12) {
        g = mul(if rng.random() { &h } else { &s }, &g);
    }
    g
}

fn clifford_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let l = rng.random_range(1..=8);
        let s = StateVector::random(l, &mut rng)?;
        let gates: Vec<_> = (0..l).map(|_| random_clifford(&mut rng)).collect();
        let p = PauliString::new(rng.random_range(0..1u64 << l), rng.random_range(0..1u64 << l), l)?;
        let u = pauli_apply(&p, &s.apply_local(&gates)?)?;
        worst = worst.max((m2(&u)? - m2(&s)?).abs());
    }
    Ok((worst < 1e-10, format!("max |M2(U psi) - M2(psi)| = {worst:.1e} over 50 trials, tol 1e-10")))
}

fn pbc_duality_symmetry() -> Outcome {
    let mut worst = (0.0f64, String::new());
    let cases: Vec<(ModelKind, Vec<f64>)> = vec![
        (ModelKind::DimerizedXx, vec![0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8]),
        (ModelKind::ClusterIsing, vec![0.25, 0.5, 0.75]),
        (ModelKind::TransverseIsing, vec![0.25, 0.5, 0.75]),
    ];
    for l in [8, 10, 12] {
        for (kind, ps) in &cases {
            for &p in ps {
                let d = delta(*kind, l, p, Boundary::Periodic)?.abs();
                if d >= worst.0 {
                    worst = (d, format!("{kind} L={l} p={p}"));
                }
            }
        }
    }
    Ok((worst.0 < 1e-8, format!("max |dM2| = {:.1e} ({}), tol 1e-8", worst.0, worst.1)))
}

fn obc_asymmetry() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in ModelKind::ALL {
        let mid = delta(kind, 12, 0.5, Boundary::Open)?;
        let grid: Vec<f64> = [0.2, 0.4, 0.6, 0.8]
            .iter()
            .map(|&p| delta(kind, 12, p, Boundary::Open))
            .collect::<Result<_>>()?;
        let spread = grid.iter().cloned().fold(f64::MIN, f64::max) - grid.iter().cloned().fold(f64::MAX, f64::min);
        ok &= mid > 1e-4 && spread > 1e-3;
        parts.push(format!("{kind}: dM2(0.5) = {mid:.4}, spread {spread:.4}"));
    }
    Ok((ok, format!("{} (need > 1e-4 and > 1e-3)", parts.join("; "))))
}

fn ising_limit() -> Outcome {
    let small = delta(ModelKind::TransverseIsing, 12, 0.05, Boundary::Open)?;
    let mid = delta(ModelKind::TransverseIsing, 12, 0.5, Boundary::Open)?;
    Ok((small < mid / 5.0, format!("dM2(0.05) = {small:.3e}, dM2(0.5)/5 = {:.3e}", mid / 5.0)))
}

fn sweep(name: &str, model: &str, boundary: &str, start: f64, stop: f64, count: usize) -> Result<SweepResult> {
    let out = archive().join(name);
    let cfg = SweepConfig::from_toml(&format!(
        "model = \"{model}\"\nlengths = [8, 10, 12]\nboundary = \"{boundary}\"\n\
         grid = {{ start = {start}, stop = {stop}, count = {count} }}\noutput = {:?}\n",
        out.to_str().unwrap()
    ))?;
    let _ = std::fs::remove_file(cfg.csv_path());
    run_sweep(&cfg)
}

fn peak_phenomenology() -> Outcome {
    let dxx = sweep("dxx_obc", "dimerized-xx", "obc", -1.0, 1.0, 41)?;
    let ti = sweep("ti_obc", "transverse-ising", "obc", 0.1, 2.0, 77)?;
    let tip = sweep("ti_pbc", "transverse-ising", "pbc", 0.1, 2.0, 77)?;
    let peaks = |r: &SweepResult| -> Vec<f64> { [8, 10, 12].iter().map(|&l| r.peak(l).unwrap().parameter).collect() };
    let (d, t, tp) = (peaks(&dxx), peaks(&ti), peaks(&tip));
    let dxx_ok = d.iter().all(|&p| p > 0.0) && d.windows(2).all(|w| w[1] <= w[0]) && d[2] < d[0];
    let ti_ok = t.iter().all(|&p| p < 1.0) && t.windows(2).all(|w| w[1] >= w[0]) && t[2] > t[0];
    let grid = tip.rows.iter().filter(|r| r.length == 8).map(|r| r.parameter);
    let nearest = grid.min_by(|a, b| (a - 1.0).abs().total_cmp(&(b - 1.0).abs())).unwrap();
    let pbc_ok = tp.iter().all(|&p| p == nearest);
    let fmt = |v: &[f64]| v.iter().map(|p| format!("{p:.3}")).collect::<Vec<_>>().join(" -> ");
    Ok((
        dxx_ok && ti_ok && pbc_ok && dxx.failures() + ti.failures() + tip.failures() == 0,
        format!(
            "dimerized XX OBC delta* {}; Ising OBC h* {}; Ising PBC h* {} (nearest grid point {nearest:.3})",
            fmt(&d),
            fmt(&t),
            fmt(&tp)
        ),
    ))
}

fn basis_minimization() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for kind in ModelKind::ALL {
        let s = ground(kind, 6, 0.5, Boundary::Open)?;
        let r = minimize_basis_magic(&s, &OptimizerOptions::default())?;
        let lowest = r.restarts.iter().map(|x| x.final_value).fold(f64::INFINITY, f64::min);
        ok &= lowest >= r.zero_value - 1e-6 && r.value >= r.zero_value - 1e-6;
        parts.push(format!("{kind}: best - computational = {:+.1e}", lowest - r.zero_value));
    }
    Ok((ok, format!("{} (tol -1e-6)", parts.join("; "))))
}

fn spectral_duality() -> Outcome {
    let opts = SolverOptions::default();
    let dir = archive();
    let mut ok = true;
    let mut worst = 0.0f64;
    for l in [8, 10] {
        for p in [0.3, 0.6] {
            let r = verify_spectral_duality(ModelKind::DimerizedXx, l, p, 8, 1e-8, &opts)?;
            write_spectral_report(&dir.join(format!("spectral_dxx_L{l}_{p}.csv")), &r)?;
            ok &= r.pass;
            worst = worst.max(r.max_discrepancy);
        }
    }
    let mut others = Vec::new();
    for kind in [ModelKind::ClusterIsing, ModelKind::TransverseIsing] {
        let r = verify_spectral_duality(kind, 8, 0.5, 8, 1e-8, &opts)?;
        let path = dir.join(format!("spectral_{}_L8.csv", kind.name()));
        write_spectral_report(&path, &r)?;
        others.push(format!(
            "{kind} {} (max diff {:.2e})",
            if r.pass { "pass" } else { "fail" },
            r.max_discrepancy
        ));
    }
    Ok((
        ok,
        format!(
            "dimerized XX max diff {worst:.1e} (tol 1e-8); reports archived: {}",
            others.join(", ")
        ),
    ))
}

fn renyi_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let l = rng.random_range(1..=8);
        let s = StateVector::random(l, &mut rng)?;
        worst = worst.min(sre_exhaustive(&s, 1.0)?.value - m2(&s)?);
    }
    Ok((worst >= -1e-9, format!("min (M1 - M2) = {worst:.3e} over 20 states, tol -1e-9")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("stabilizer zeros", stabilizer_zeros),
        ("analytic T-state magic", analytic_t_state),
        ("purity identity", purity_identity),
        ("oracle equivalence", oracle_equivalence),
        ("Clifford invariance", clifford_invariance),
        ("PBC duality symmetry", pbc_duality_symmetry),
        ("OBC asymmetry", obc_asymmetry),
        ("OBC Ising limit", ising_limit),
        ("peak phenomenology", peak_phenomenology),
        ("basis minimization", basis_minimization),
        ("spectral duality", spectral_duality),
        ("Renyi monotonicity", renyi_monotonicity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let tag = format!("{:02} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| tag.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let (pass, detail) = run().unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            failed += 1;
        }
        println!(
            "[{}] {tag}: {detail} ({:.1}s)",
            if pass { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
