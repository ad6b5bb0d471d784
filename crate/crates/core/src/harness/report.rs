//! CSV reports for single runs.

use std::path::Path;

use super::table::format_float;
use crate::basis_opt::BasisSearch;
use crate::duality::SpectralReport;
use crate::error::Result;

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(csv::Writer::from_path(path)?)
}

/// One row per restart; angles are space-separated `θ φ λ` triples in site
/// order.
pub fn write_basis_search(path: &Path, search: &BasisSearch) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "restart",
        "start_seed",
        "start_value",
        "final_value",
        "evaluations",
        "converged",
        "zero_value",
        "angles",
    ])?;
    for r in &search.restarts {
        let angles: Vec<String> = r.basis.angles().iter().map(|&a| format_float(a)).collect();
        w.write_record([
            r.index.to_string(),
            r.start_seed.map(|s| s.to_string()).unwrap_or_default(),
            format_float(r.start_value),
            format_float(r.final_value),
            r.evaluations.to_string(),
            r.converged.to_string(),
            format_float(search.zero_value),
            angles.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per level.
pub fn write_spectral_report(path: &Path, r: &SpectralReport) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "model",
        "L",
        "parameter",
        "dual_parameter",
        "mapped",
        "level",
        "primal_energy",
        "mapped_energy",
        "abs_diff",
        "tol",
        "pass",
    ])?;
    for (i, (a, b)) in r.primal.iter().zip(&r.mapped).enumerate() {
        w.write_record([
            r.kind.name().to_string(),
            r.length.to_string(),
            format_float(r.parameter),
            format_float(r.dual_parameter),
            r.mapped_description(),
            i.to_string(),
            format_float(*a),
            format_float(*b),
            format_float((a - b).abs()),
            format_float(r.tol),
            r.pass.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
