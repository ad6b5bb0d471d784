//! Dual points of the three models and the magic difference between them.
//!
//! Dimerized XX: `δ ↔ −δ` (one-site translation). Cluster-Ising: `λ ↔ 1/λ`.
//! Transverse Ising: `h ↔ 1/h` (Kramers–Wannier).

use serde::{Deserialize, Serialize};

use crate::eigensolver::{ground_state, low_spectrum, GroundStateResult, SolverOptions};
use crate::error::{Error, Result};
use crate::magic::{sre, SreEstimate, SreOptions};
use crate::models::{build_model, Boundary, ModelKind, ModelSpec};
use crate::sector::Sector;

/// Largest change of `M₂` tolerated when the tie-break field is divided by 10.
pub const TIE_BREAK_STABILITY: f64 = 1e-5;

/// Image of `p` under the model's duality map.
///
/// `−p` is exact and `1/(1/p)` returns `p` to within one ulp.
pub fn dual_parameter(kind: ModelKind, p: f64) -> Result<f64> {
    if !p.is_finite() {
        return Err(Error::InvalidArgument(format!("parameter {p} is not finite")));
    }
    match kind {
        ModelKind::DimerizedXx => {
            if !(-1.0..=1.0).contains(&p) {
                return Err(Error::InvalidArgument(format!("delta must lie in [-1, 1], got {p}")));
            }
            Ok(-p + 0.0)
        }
        ModelKind::ClusterIsing | ModelKind::TransverseIsing => {
            if p <= 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "{} = {p} has no dual point under p -> 1/p",
                    kind.parameter_name()
                )));
            }
            Ok(1.0 / p)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DualityOptions {
    pub solver: SolverOptions,
    pub sre: SreOptions,
    /// Re-solve tie-broken endpoints with `ε/10` and flag changes of `M₂`.
    pub check_tie_break: bool,
}

impl Default for DualityOptions {
    fn default() -> Self {
        DualityOptions {
            solver: SolverOptions::default(),
            sre: SreOptions::default(),
            check_tie_break: true,
        }
    }
}

/// Solver diagnostics of one endpoint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndpointDiagnostics {
    pub energy: f64,
    pub gap: f64,
    pub degenerate: bool,
    pub tie_break_applied: bool,
    pub residual: f64,
    pub sector: String,
    /// `|M(ε) − M(ε/10)|` when the tie-break was applied and checked.
    pub tie_break_shift: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualPairResult {
    pub spec: ModelSpec,
    pub dual_parameter: f64,
    pub m2_primal: SreEstimate,
    pub m2_dual: SreEstimate,
    /// `m2_primal.value − m2_dual.value`.
    pub delta_m2: f64,
    pub primal: EndpointDiagnostics,
    pub dual: EndpointDiagnostics,
    pub flags: Vec<String>,
}

/// Ground state and magic at one parameter value.
pub struct Endpoint {
    pub ground: GroundStateResult,
    pub magic: SreEstimate,
    pub diagnostics: EndpointDiagnostics,
}

pub fn solve_endpoint(spec: &ModelSpec, opts: &DualityOptions) -> Result<Endpoint> {
    let h = build_model(spec)?;
    let ground = ground_state(&h, &opts.solver)?;
    let magic = sre(&ground.state, &opts.sre)?;
    let mut shift = None;
    if ground.tie_break_applied && opts.check_tie_break {
        let finer = SolverOptions {
            degeneracy_epsilon: opts.solver.degeneracy_epsilon / 10.0,
            ..opts.solver.clone()
        };
        let g = ground_state(&h, &finer)?;
        shift = Some((sre(&g.state, &opts.sre)?.value - magic.value).abs());
    }
    let diagnostics = EndpointDiagnostics {
        energy: ground.energy,
        gap: ground.gap,
        degenerate: ground.degenerate,
        tie_break_applied: ground.tie_break_applied,
        residual: ground.residual,
        sector: ground.sector.to_string(),
        tie_break_shift: shift,
    };
    Ok(Endpoint {
        ground,
        magic,
        diagnostics,
    })
}

fn endpoint_flags(tag: &str, d: &EndpointDiagnostics, m: &SreEstimate, flags: &mut Vec<String>) {
    if d.degenerate {
        flags.push(format!("{tag}-degenerate"));
    }
    if d.tie_break_applied {
        flags.push(format!("{tag}-tie-break"));
    }
    if let Some(s) = d.tie_break_shift {
        if s > TIE_BREAK_STABILITY {
            flags.push(format!("{tag}-tie-break-unstable"));
        }
    }
    if !m.warnings.is_empty() {
        flags.push(format!("{tag}-sre-warning"));
    }
}

/// `ΔM = M(p) − M(p̃)` with both endpoints solved and evaluated the same way.
pub fn delta_magic(spec: &ModelSpec, opts: &DualityOptions) -> Result<DualPairResult> {
    spec.validate()?;
    opts.sre.validate_for(spec.length)?;
    let dual = dual_parameter(spec.kind, spec.parameter)?;
    let dual_spec = spec.with_parameter(dual)?;
    let (a, b) = crate::par::join(|| solve_endpoint(spec, opts), || solve_endpoint(&dual_spec, opts));
    let (a, b) = (a?, b?);
    let mut flags = Vec::new();
    endpoint_flags("primal", &a.diagnostics, &a.magic, &mut flags);
    endpoint_flags("dual", &b.diagnostics, &b.magic, &mut flags);
    Ok(DualPairResult {
        spec: *spec,
        dual_parameter: dual,
        delta_m2: a.magic.value - b.magic.value,
        m2_primal: a.magic,
        m2_dual: b.magic,
        primal: a.diagnostics,
        dual: b.diagnostics,
        flags,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub kind: ModelKind,
    pub length: usize,
    pub parameter: f64,
    pub dual_parameter: f64,
    pub k: usize,
    pub tol: f64,
    /// Lowest levels of `H(p)`.
    pub primal: Vec<f64>,
    /// Lowest levels of the mapped Hamiltonian: `H(−p)` or `p·H(1/p)`.
    pub mapped: Vec<f64>,
    pub max_discrepancy: f64,
    pub pass: bool,
}

impl SpectralReport {
    pub fn mapped_description(&self) -> String {
        match self.kind {
            ModelKind::DimerizedXx => format!("H({})", self.dual_parameter),
            _ => format!("{} * H({})", self.parameter, self.dual_parameter),
        }
    }
}

/// Compares the `k` lowest levels of `H(p)` with those of its dual image
/// under periodic boundaries.
pub fn verify_spectral_duality(
    kind: ModelKind,
    length: usize,
    p: f64,
    k: usize,
    tol: f64,
    solver: &SolverOptions,
) -> Result<SpectralReport> {
    if k == 0 {
        return Err(Error::InvalidArgument("need at least one level".into()));
    }
    let spec = ModelSpec::new(kind, length, p, Boundary::Periodic)?;
    let dual = dual_parameter(kind, p)?;
    let h = build_model(&spec)?;
    let h_dual = build_model(&spec.with_parameter(dual)?)?;
    let mapped_h = match kind {
        ModelKind::DimerizedXx => h_dual,
        _ => h_dual.scaled(p),
    };
    let (a, b) = crate::par::join(|| low_spectrum(&h, k, solver), || low_spectrum(&mapped_h, k, solver));
    let (primal, mapped) = (a?, b?);
    let max_discrepancy = primal
        .iter()
        .zip(&mapped)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(SpectralReport {
        kind,
        length,
        parameter: p,
        dual_parameter: dual,
        k,
        tol,
        primal,
        mapped,
        max_discrepancy,
        pass: max_discrepancy < tol,
    })
}

/// Sector the model's ground state is expected in.
pub fn expected_sector(kind: ModelKind) -> Sector {
    match kind {
        ModelKind::DimerizedXx => Sector::Magnetization(0),
        ModelKind::ClusterIsing => Sector::ZParity { even: true },
        ModelKind::TransverseIsing => Sector::XParity { even: true },
    }
}
