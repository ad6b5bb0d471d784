//! gnuplot scripts for sweep CSVs.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::SweepConfig;
use crate::error::{Error, Result};
use crate::models::{Boundary, ModelKind};

#[derive(Clone, Debug, PartialEq)]
pub struct PlotStyle {
    pub title: String,
    pub xlabel: String,
    pub ylabel: String,
    /// `.png` written by the script; defaults to the CSV name.
    pub output: Option<String>,
}

impl PlotStyle {
    pub fn new(model: Option<ModelKind>, boundary: Option<Boundary>, dual: bool) -> Self {
        let xlabel = model.map_or("parameter", |m| m.parameter_name()).to_string();
        let ylabel = if dual { "Delta M_2" } else { "M_2" }.to_string();
        let title = match (model, boundary) {
            (Some(m), Some(b)) => format!("{m} {b}"),
            (Some(m), None) => m.to_string(),
            _ => String::new(),
        };
        PlotStyle {
            title,
            xlabel,
            ylabel,
            output: None,
        }
    }

    pub fn for_config(cfg: &SweepConfig, dual: bool) -> Self {
        let mut s = Self::new(Some(cfg.model), Some(cfg.boundary), dual);
        if let Some(label) = &cfg.label {
            s.title = label.clone();
        }
        s
    }
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// Writes `<csv stem>.gp` next to `csv` and returns its path. The script
/// draws one curve per chain length: `value` for sweep tables and
/// `delta_m2` for dual tables.
pub fn emit_plot_script(csv: &Path, style: &PlotStyle) -> Result<PathBuf> {
    if !csv.is_file() {
        return Err(Error::Config(format!("no CSV at {}", csv.display())));
    }
    let mut rd = csv::Reader::from_path(csv)?;
    let header = rd.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .map(|i| i + 1)
            .ok_or_else(|| Error::Config(format!("{} has no {name} column", csv.display())))
    };
    let dual = header.iter().any(|h| h == "delta_m2");
    let (lcol, xcol) = (col("L")?, col("parameter")?);
    let ycol = col(if dual { "delta_m2" } else { "value" })?;
    let mut lengths = BTreeSet::new();
    for rec in rd.records() {
        let rec = rec?;
        let l: usize = rec
            .get(lcol - 1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Config(format!("bad L in {}", csv.display())))?;
        lengths.insert(l);
    }

    let name = csv
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Config(format!("bad CSV path {}", csv.display())))?;
    let stem = name.strip_suffix(".csv").unwrap_or(name);
    let mut s = String::new();
    writeln!(s, "# gnuplot script for {name}").unwrap();
    writeln!(s, "# columns: x = {}, y = {}", &header[xcol - 1], &header[ycol - 1]).unwrap();
    if lengths.is_empty() {
        writeln!(s, "# no data rows").unwrap();
    } else {
        let png = style.output.clone().unwrap_or_else(|| format!("{stem}.png"));
        writeln!(s, "set datafile separator ','").unwrap();
        writeln!(s, "set terminal pngcairo size 900,600").unwrap();
        writeln!(s, "set output {}", quote(&png)).unwrap();
        writeln!(s, "set title {}", quote(&style.title)).unwrap();
        writeln!(s, "set xlabel {}", quote(&style.xlabel)).unwrap();
        writeln!(s, "set ylabel {}", quote(&style.ylabel)).unwrap();
        writeln!(s, "set key outside right").unwrap();
        let entries: Vec<String> = lengths
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let file = if i == 0 { quote(name) } else { "''".into() };
                format!(
                    "{file} every ::1 using (${lcol} == {l} ? ${xcol} : 1/0):{ycol} with linespoints title 'L={l}'"
                )
            })
            .collect();
        writeln!(s, "plot {}", entries.join(", \\\n     ")).unwrap();
    }
    let out = csv.with_file_name(format!("{stem}.gp"));
    std::fs::write(&out, s)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    #[test]
    fn one_entry_per_length() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("s.csv");
        fs::write(
            &csv,
            "model,L,boundary,parameter,alpha,method,value\nx,4,obc,1,2,t,0.5\nx,6,obc,1,2,t,0.7\nx,4,obc,2,2,t,0.1\n",
        )
        .unwrap();
        let style = PlotStyle::new(Some(ModelKind::TransverseIsing), Some(Boundary::Open), false);
        let gp = fs::read_to_string(emit_plot_script(&csv, &style).unwrap()).unwrap();
        assert_eq!(gp.matches("with linespoints").count(), 2);
        assert!(gp.contains("'s.csv' every ::1 using ($2 == 4 ? $4 : 1/0):7"));
        assert!(gp.contains("set xlabel 'h'"));
        assert!(!gp.contains(dir.path().to_str().unwrap()));
    }

    #[test]
    fn dual_tables_plot_delta() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("d.csv");
        fs::write(&csv, "model,L,boundary,parameter,dual_parameter,m2_primal,m2_dual,delta_m2\nx,8,obc,0.5,2,1,1,0\n").unwrap();
        let gp = fs::read_to_string(emit_plot_script(&csv, &PlotStyle::new(None, None, true)).unwrap()).unwrap();
        assert!(gp.contains(":8 with linespoints title 'L=8'"));
    }

    #[test]
    fn empty_and_missing() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("e.csv");
        fs::write(&csv, "model,L,boundary,parameter,alpha,method,value\n").unwrap();
        let gp = fs::read_to_string(emit_plot_script(&csv, &PlotStyle::new(None, None, false)).unwrap()).unwrap();
        assert!(gp.lines().all(|l| l.starts_with('#')));
        assert!(!gp.lines().any(|l| l.starts_with("plot")));
        assert!(emit_plot_script(&dir.path().join("nope.csv"), &PlotStyle::new(None, None, false)).is_err());
    }
}
