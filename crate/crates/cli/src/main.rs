use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use srelab::harness::{self, Overrides, ParameterGrid, PlotStyle, Row, SweepConfig, SweepRow};
use srelab::{
    build_model, ground_state, minimize_basis_magic, sre, verify_spectral_duality, Boundary, ChainOptions, ModelKind,
    ModelSpec, OptimizerOptions, SolverMethod, SolverOptions, SreMethod, SreOptions,
};

#[derive(Parser)]
#[command(name = "srelab", version, about = "Stabilizer Rényi entropy of spin-chain ground states")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ground-state energy, gap and solver diagnostics.
    GroundState {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the amplitudes to this CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stabilizer Rényi entropy of one ground state.
    Sre {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        sre: SreArgs,
        /// Write a one-row sweep CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// M_α over a parameter grid for several chain lengths.
    Sweep(SweepArgs),
    /// ΔM₂ between each grid point and its dual point.
    DualSweep(SweepArgs),
    /// Compare the low spectrum of H(p) with its dual image (periodic chains).
    SpectralDuality {
        #[arg(long, value_parser = parse_model)]
        model: ModelKind,
        #[arg(long)]
        length: usize,
        #[arg(long, allow_negative_numbers = true)]
        param: f64,
        /// Number of levels compared.
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search for a product basis that lowers the ground state's magic.
    BasisSearch {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        #[arg(long, default_value_t = 20)]
        restarts: usize,
        #[arg(long, default_value_t = 5000)]
        max_evaluations: usize,
        /// Seed of the random starts.
        #[arg(long, default_value_t = 7)]
        search_seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a gnuplot script for a sweep or dual-sweep CSV.
    Plot {
        csv: PathBuf,
        /// Take title and axis labels from this config.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_parser = parse_model)]
    model: ModelKind,
    #[arg(long)]
    length: usize,
    #[arg(long, value_parser = parse_boundary, default_value = "obc")]
    boundary: Boundary,
    #[arg(long, allow_negative_numbers = true)]
    param: f64,
}

impl ModelArgs {
    fn spec(&self) -> srelab::Result<ModelSpec> {
        ModelSpec::new(self.model, self.length, self.param, self.boundary)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// auto, dense or lanczos.
    #[arg(long, value_parser = parse_solver, default_value = "auto")]
    solver: SolverMethod,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    degeneracy_epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SolverArgs {
    fn options(&self) -> srelab::Result<SolverOptions> {
        let d = SolverOptions::default();
        let o = SolverOptions {
            method: self.solver,
            tolerance: self.tolerance.unwrap_or(d.tolerance),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            degeneracy_epsilon: self.degeneracy_epsilon.unwrap_or(d.degeneracy_epsilon),
            seed: self.seed.unwrap_or(d.seed),
            ..d
        };
        o.validate()?;
        Ok(o)
    }
}

#[derive(Args)]
struct SreArgs {
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// direct, transform or montecarlo.
    #[arg(long, value_parser = parse_method, default_value = "transform")]
    method: SreMethod,
    /// Monte Carlo samples per chain.
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    chains: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long)]
    chain_seed: Option<u64>,
    /// Fraction of two-site Monte Carlo moves.
    #[arg(long)]
    pair_moves: Option<f64>,
}

impl SreArgs {
    fn options(&self) -> SreOptions {
        let d = ChainOptions::default();
        SreOptions {
            method: self.method,
            alpha: self.alpha,
            chain: ChainOptions {
                samples: self.samples.unwrap_or(d.samples),
                chains: self.chains.unwrap_or(d.chains),
                seed: self.chain_seed.unwrap_or(d.seed),
                pair_moves: self.pair_moves.unwrap_or(d.pair_moves),
                ..d
            },
            ..SreOptions::default()
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    /// TOML file; flags given here replace its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_model)]
    model: Option<ModelKind>,
    /// Chain lengths, repeated or comma-separated.
    #[arg(long, value_delimiter = ',')]
    length: Vec<usize>,
    #[arg(long, value_parser = parse_boundary)]
    boundary: Option<Boundary>,
    /// `start:stop:count` or `a,b,c`.
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true, conflicts_with = "param")]
    grid: Option<ParameterGrid>,
    /// A single parameter value.
    #[arg(long, allow_negative_numbers = true)]
    param: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_method)]
    method: Option<SreMethod>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output prefix; `.csv` and `.gp` are appended.
    #[arg(long)]
    out: Option<String>,
    /// Skip the gnuplot script.
    #[arg(long)]
    no_plot: bool,
}

impl SweepArgs {
    fn config(&self) -> srelab::Result<SweepConfig> {
        let text = match &self.config {
            Some(p) => Some(read_config(p)?),
            None => None,
        };
        let over = Overrides {
            model: self.model,
            lengths: (!self.length.is_empty()).then(|| self.length.clone()),
            boundary: self.boundary,
            grid: self.grid.clone().or(self.param.map(|p| ParameterGrid::Values(vec![p]))),
            alpha: self.alpha,
            method: self.method,
            seed: self.seed,
            output: self.out.clone(),
        };
        SweepConfig::merged(text.as_deref(), &over)
    }
}

fn read_config(p: &Path) -> srelab::Result<String> {
    std::fs::read_to_string(p).map_err(|e| srelab::Error::Config(format!("cannot read {}: {e}", p.display())))
}

fn parse_model(s: &str) -> Result<ModelKind, String> {
    s.parse().map_err(|e: srelab::Error| e.to_string())
}

fn parse_boundary(s: &str) -> Result<Boundary, String> {
    s.parse().map_err(|e: srelab::Error| e.to_string())
}

fn parse_method(s: &str) -> Result<SreMethod, String> {
    s.parse().map_err(|e: srelab::Error| e.to_string())
}

fn parse_solver(s: &str) -> Result<SolverMethod, String> {
    s.parse().map_err(|e: srelab::Error| e.to_string())
}

fn parse_grid(s: &str) -> Result<ParameterGrid, String> {
    s.parse().map_err(|e: srelab::Error| e.to_string())
}

/// Raised when some sweep points failed; the CSV has been written.
#[derive(Debug)]
struct PartialFailure(usize);

impl std::fmt::Display for PartialFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} point(s) failed; see the error column", self.0)
    }
}

impl std::error::Error for PartialFailure {}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::GroundState { model, solver, out } => {
            let spec = model.spec()?;
            let g = ground_state(&build_model(&spec)?, &solver.options()?)?;
            println!("model      {spec}");
            println!("energy     {:.12}", g.energy);
            println!("gap        {:.6e}", g.gap);
            println!("degenerate {}", g.degenerate);
            println!("tie_break  {}", g.tie_break_applied);
            println!("sector     {}", g.sector);
            println!("method     {:?}", g.method);
            println!("iterations {}", g.iterations);
            println!("residual   {:.3e}", g.residual);
            if let Some(path) = out {
                let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
                w.write_record(["index", "re", "im"])?;
                for (i, a) in g.state.amplitudes().iter().enumerate() {
                    w.write_record([i.to_string(), harness::format_float(a.re), harness::format_float(a.im)])?;
                }
                w.flush()?;
            }
        }
        Command::Sre { model, solver, sre: sre_args, out } => {
            let spec = model.spec()?;
            let opts = sre_args.options();
            opts.validate_for(spec.length)?;
            let sopts = solver.options()?;
            let g = ground_state(&build_model(&spec)?, &sopts)?;
            let e = sre(&g.state, &opts)?;
            println!("model      {spec}");
            println!("M_{}        {:.12}", e.alpha, e.value);
            println!("method     {}", e.method);
            println!("std_error  {:.3e}", e.std_error);
            if let Some(p) = e.purity_check {
                println!("purity     {p:.12}");
            }
            if let Some(a) = e.acceptance_rate {
                println!("acceptance {a:.4}");
            }
            for w in &e.warnings {
                eprintln!("warning: {w}");
            }
            if let Some(path) = out {
                let row = SweepRow {
                    model: spec.kind,
                    length: spec.length,
                    boundary: spec.boundary,
                    parameter: spec.parameter,
                    alpha: e.alpha,
                    method: e.method,
                    seed: e.seed.unwrap_or(sopts.seed),
                    value: Some(e.value),
                    std_error: Some(e.std_error),
                    purity_check: e.purity_check,
                    energy: Some(g.energy),
                    gap: Some(g.gap),
                    degenerate: Some(g.degenerate),
                    tie_break: Some(g.tie_break_applied),
                    error: None,
                };
                let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
                w.write_record(SweepRow::HEADER)?;
                w.write_record(row.to_record())?;
                w.flush()?;
            }
        }
        Command::Sweep(args) => {
            let cfg = args.config()?;
            let r = harness::run_sweep(&cfg)?;
            for p in &r.peaks {
                println!("L={:<3} peak {} = {} (M_{} = {:.6})", p.length, cfg.model.parameter_name(), p.parameter, cfg.alpha, p.value);
            }
            println!("wrote {}", r.csv.display());
            if !args.no_plot {
                let gp = harness::emit_plot_script(&r.csv, &PlotStyle::for_config(&cfg, false))?;
                println!("wrote {}", gp.display());
            }
            if r.failures() > 0 {
                return Err(PartialFailure(r.failures()).into());
            }
        }
        Command::DualSweep(args) => {
            let cfg = args.config()?;
            let r = harness::run_dual_sweep(&cfg)?;
            for row in &r.rows {
                match (row.delta_m2, &row.error) {
                    (Some(d), _) => println!(
                        "L={:<3} {}={:<8} dM2 = {:+.6e} {}",
                        row.length,
                        cfg.model.parameter_name(),
                        row.parameter,
                        d,
                        row.flags.join(" ")
                    ),
                    (None, e) => println!("L={:<3} {}={:<8} failed: {}", row.length, cfg.model.parameter_name(), row.parameter, e.as_deref().unwrap_or("")),
                }
            }
            for c in &r.convergence {
                println!("L {}->{} at {}: |change| = {:.3e}", c.from, c.to, c.parameter, c.change);
            }
            println!("wrote {}", r.csv.display());
            println!("wrote {}", r.convergence_csv.display());
            if !args.no_plot {
                let gp = harness::emit_plot_script(&r.csv, &PlotStyle::for_config(&cfg, true))?;
                println!("wrote {}", gp.display());
            }
            if r.failures() > 0 {
                return Err(PartialFailure(r.failures()).into());
            }
        }
        Command::SpectralDuality { model, length, param, levels, tol, solver, out } => {
            let r = verify_spectral_duality(model, length, param, levels, tol, &solver.options()?)?;
            println!("{:>5} {:>20} {:>20} {:>10}", "level", format!("H({param})"), r.mapped_description(), "diff");
            for (i, (a, b)) in r.primal.iter().zip(&r.mapped).enumerate() {
                println!("{i:>5} {a:>20.12} {b:>20.12} {:>10.2e}", (a - b).abs());
            }
            println!("max discrepancy {:.3e} (tol {:.1e}): {}", r.max_discrepancy, tol, if r.pass { "pass" } else { "FAIL" });
            if let Some(path) = out {
                harness::write_spectral_report(&path, &r)?;
                println!("wrote {}", path.display());
            }
        }
        Command::BasisSearch { model, solver, alpha, restarts, max_evaluations, search_seed, out } => {
            let spec = model.spec()?;
            let g = ground_state(&build_model(&spec)?, &solver.options()?)?;
            let opts = OptimizerOptions {
                restarts,
                max_evaluations,
                alpha,
                seed: search_seed,
                ..OptimizerOptions::default()
            };
            let s = minimize_basis_magic(&g.state, &opts)?;
            println!("model         {spec}");
            println!("computational {:.12}", s.zero_value);
            println!("best          {:.12}", s.value);
            println!("difference    {:+.3e}", s.value - s.zero_value);
            if let Some(path) = out {
                harness::write_basis_search(&path, &s)?;
                println!("wrote {}", path.display());
            }
        }
        Command::Plot { csv, config } => {
            let style = match config {
                Some(p) => {
                    let cfg = SweepConfig::from_toml(&read_config(&p)?)?;
                    let head = std::fs::read_to_string(&csv).unwrap_or_default();
                    PlotStyle::for_config(&cfg, head.lines().next().is_some_and(|h| h.contains("delta_m2")))
                }
                None => style_from_csv(&csv),
            };
            let gp = harness::emit_plot_script(&csv, &style)?;
            println!("wrote {}", gp.display());
        }
    }
    Ok(())
}

fn style_from_csv(csv: &Path) -> PlotStyle {
    let mut model = None;
    let mut boundary = None;
    let mut dual = false;
    if let Ok(mut rd) = csv::Reader::from_path(csv) {
        dual = rd.headers().is_ok_and(|h| h.iter().any(|c| c == "delta_m2"));
        if let Some(Ok(rec)) = rd.records().next() {
            model = rec.get(0).and_then(|m| m.parse().ok());
            boundary = rec.get(2).and_then(|b| b.parse().ok());
        }
    }
    PlotStyle::new(model, boundary, dual)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<PartialFailure>().is_some() {
        return 2;
    }
    match e.chain().find_map(|c| c.downcast_ref::<srelab::Error>()) {
        Some(err) if err.is_validation() => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let threads = cli.threads;
    let result = srelab::par::with_threads(threads, || run(cli.command));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
