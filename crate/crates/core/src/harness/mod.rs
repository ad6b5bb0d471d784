//! Config-driven sweeps with CSV output and gnuplot scripts.

pub mod config;
pub mod plot;
pub mod report;
pub mod sweep;
pub mod table;

pub use config::{Overrides, ParameterGrid, SweepConfig};
pub use plot::{emit_plot_script, PlotStyle};
pub use report::{write_basis_search, write_spectral_report};
pub use sweep::{run_dual_sweep, run_sweep, ConvergenceRow, DualSweepResult, Peak, SweepResult};
pub use table::{format_float, DualRow, Row, SweepRow};
