use std::collections::BTreeMap;
use std::path::PathBuf;

use super::config::SweepConfig;
use super::table::{fill_table, DualRow, SweepRow};
use crate::duality::{delta_magic, DualityOptions};
use crate::eigensolver::ground_state;
use crate::error::Result;
use crate::magic::sre;
use crate::models::{build_model, ModelSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub length: usize,
    pub parameter: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// One per length that has at least one successful point.
    pub peaks: Vec<Peak>,
    pub csv: PathBuf,
}

impl SweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn peak(&self, length: usize) -> Option<Peak> {
        self.peaks.iter().copied().find(|p| p.length == length)
    }
}

/// `|ΔM(L_to) − ΔM(L_from)|` at one parameter for consecutive lengths.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub parameter: f64,
    pub from: usize,
    pub to: usize,
    pub delta_from: f64,
    pub delta_to: f64,
    pub change: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualSweepResult {
    pub rows: Vec<DualRow>,
    pub convergence: Vec<ConvergenceRow>,
    pub csv: PathBuf,
    pub convergence_csv: PathBuf,
}

impl DualSweepResult {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// Points in output order: by length, then parameter.
fn points(cfg: &SweepConfig) -> Vec<(usize, f64)> {
    let mut lengths = cfg.lengths.clone();
    lengths.sort_unstable();
    let mut params = cfg.parameters();
    params.sort_by(f64::total_cmp);
    params.dedup();
    lengths
        .into_iter()
        .flat_map(|l| params.iter().map(move |&p| (l, p)))
        .collect()
}

/// Grid argmax per length, ties to the smaller parameter.
pub fn peaks(rows: &[SweepRow]) -> Vec<Peak> {
    let mut best: BTreeMap<usize, Peak> = BTreeMap::new();
    for r in rows {
        let Some(v) = r.value else { continue };
        let cand = Peak {
            length: r.length,
            parameter: r.parameter,
            value: v,
        };
        best.entry(r.length)
            .and_modify(|b| {
                if v > b.value || (v == b.value && r.parameter < b.parameter) {
                    *b = cand;
                }
            })
            .or_insert(cand);
    }
    best.into_values().collect()
}

fn sweep_point(cfg: &SweepConfig, t: &SweepRow) -> SweepRow {
    let run = || -> Result<SweepRow> {
        let spec = ModelSpec::new(t.model, t.length, t.parameter, t.boundary)?;
        let g = ground_state(&build_model(&spec)?, &cfg.solver_options())?;
        let e = sre(&g.state, &cfg.sre_options())?;
        Ok(SweepRow {
            value: Some(e.value),
            std_error: Some(e.std_error),
            purity_check: e.purity_check,
            energy: Some(g.energy),
            gap: Some(g.gap),
            degenerate: Some(g.degenerate),
            tie_break: Some(g.tie_break_applied),
            ..t.clone()
        })
    };
    run().unwrap_or_else(|e| SweepRow {
        error: Some(e.to_string()),
        ..t.clone()
    })
}

/// Ground-state magic over every `(L, parameter)` of `cfg`, written to
/// `cfg.csv_path()`. Rows already present in that file are reused.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let template = points(cfg)
        .into_iter()
        .map(|(length, parameter)| SweepRow {
            model: cfg.model,
            length,
            boundary: cfg.boundary,
            parameter,
            alpha: cfg.alpha,
            method: cfg.method,
            seed: cfg.row_seed(),
            value: None,
            std_error: None,
            purity_check: None,
            energy: None,
            gap: None,
            degenerate: None,
            tie_break: None,
            error: None,
        })
        .collect();
    let csv = cfg.csv_path();
    let rows = fill_table(&csv, template, |t| sweep_point(cfg, t))?;
    Ok(SweepResult {
        peaks: peaks(&rows),
        rows,
        csv,
    })
}

fn dual_point(cfg: &SweepConfig, t: &DualRow) -> DualRow {
    let opts = DualityOptions {
        solver: cfg.solver_options(),
        sre: cfg.sre_options(),
        check_tie_break: cfg.check_tie_break,
    };
    let run = || -> Result<DualRow> {
        let spec = ModelSpec::new(t.model, t.length, t.parameter, t.boundary)?;
        let r = delta_magic(&spec, &opts)?;
        let err = r.m2_primal.std_error.hypot(r.m2_dual.std_error);
        Ok(DualRow {
            dual_parameter: Some(r.dual_parameter),
            m2_primal: Some(r.m2_primal.value),
            m2_dual: Some(r.m2_dual.value),
            delta_m2: Some(r.delta_m2),
            std_error: Some(err),
            flags: r.flags,
            ..t.clone()
        })
    };
    run().unwrap_or_else(|e| DualRow {
        error: Some(e.to_string()),
        ..t.clone()
    })
}

pub fn convergence(rows: &[DualRow]) -> Vec<ConvergenceRow> {
    let mut by_param: BTreeMap<u64, Vec<&DualRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.delta_m2.is_some()) {
        by_param.entry(r.parameter.to_bits()).or_default().push(r);
    }
    let mut out = Vec::new();
    for mut group in by_param.into_values() {
        group.sort_by_key(|r| r.length);
        for w in group.windows(2) {
            let (a, b) = (w[0].delta_m2.unwrap(), w[1].delta_m2.unwrap());
            out.push(ConvergenceRow {
                parameter: w[0].parameter,
                from: w[0].length,
                to: w[1].length,
                delta_from: a,
                delta_to: b,
                change: (b - a).abs(),
            });
        }
    }
    out.sort_by(|a, b| a.parameter.total_cmp(&b.parameter).then(a.from.cmp(&b.from)));
    out
}

fn write_convergence(path: &std::path::Path, cfg: &SweepConfig, rows: &[ConvergenceRow]) -> Result<()> {
    use super::table::format_float;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["model", "boundary", "parameter", "L_from", "L_to", "delta_from", "delta_to", "abs_change"])?;
    for c in rows {
        w.write_record([
            cfg.model.name().to_string(),
            cfg.boundary.to_string(),
            format_float(c.parameter),
            c.from.to_string(),
            c.to.to_string(),
            format_float(c.delta_from),
            format_float(c.delta_to),
            format_float(c.change),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `ΔM₂` at every `(L, parameter)` of `cfg`, plus the change between
/// consecutive lengths at each parameter.
pub fn run_dual_sweep(cfg: &SweepConfig) -> Result<DualSweepResult> {
    cfg.validate_dual()?;
    let template = points(cfg)
        .into_iter()
        .map(|(length, parameter)| DualRow {
            model: cfg.model,
            length,
            boundary: cfg.boundary,
            parameter,
            alpha: cfg.alpha,
            method: cfg.method,
            seed: cfg.row_seed(),
            dual_parameter: None,
            m2_primal: None,
            m2_dual: None,
            delta_m2: None,
            std_error: None,
            flags: Vec::new(),
            error: None,
        })
        .collect();
    let csv = cfg.csv_path();
    let rows = fill_table(&csv, template, |t| dual_point(cfg, t))?;
    let conv = convergence(&rows);
    let convergence_csv = cfg.convergence_path();
    write_convergence(&convergence_csv, cfg, &conv)?;
    Ok(DualSweepResult {
        rows,
        convergence: conv,
        csv,
        convergence_csv,
    })
}
