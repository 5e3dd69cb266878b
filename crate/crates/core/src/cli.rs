//! Command-line front end behind the `flipcpw` binary.
//!
//! Every verb reads an optional JSON [`RunConfig`], applies the command-line
//! overrides, evaluates one row per sweep point (in parallel, emitted in sweep
//! order) and writes CSV preceded by `#` provenance lines: tool version,
//! command, SHA-256 of the effective configuration, and the grid settings.
//! Output is deterministic: the same configuration gives byte-identical CSV.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver error, 4 fit or
//! optimizer failure.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{MeasuredResonator, MethodChoice, RunConfig, SweepConfig};
use crate::conformal;
use crate::cutout::{optimize_gamma, spacing_grid, MixInput};
use crate::fieldsolver::{
    coupling_cap_matrix, cpw_layout, line_params_fd, solve_es, FeedlineGeometry, Grid, GridSpec, RESONATOR,
};
use crate::geometry::{CrossSection, Facing, LineParams};
use crate::london::{self, cpw_kinetic_inductance, FitEntry, LondonConfig};
use crate::resonator::{coupling, fit_eff_length, gap_at, resonant_frequency, total_length};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "flipcpw", version, about = "Flip-chip CPW resonator design calculations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sweep one variable: VAR=START:STOP:STEP.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Output file (CSV, or the field file for solve-field).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Cross-section route: conf, fd or both.
    #[arg(long, value_parser = ["conf", "fd", "both"])]
    pub method: Option<String>,
    /// Penetration depth in nm; implies --include-kinetic.
    #[arg(long)]
    pub lambda_nm: Option<f64>,
    /// Add London kinetic inductance.
    #[arg(long)]
    pub include_kinetic: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Per-unit-length L and C by conformal mapping and/or field solver.
    LineParams(Common),
    /// Resonant frequency, optional kinetic shift and coupling shift.
    Freq(Common),
    /// Capacitance matrix, coupling quality factor and frequency shift.
    Coupling(Common),
    /// Evaluate placed resonators using the corner-gap map.
    Batch(Common),
    /// Fit the penetration depth to measured frequencies.
    FitLambda(Common),
    /// Fit the coupling-pad effective-length coefficients.
    FitEfflen(Common),
    /// Optimal dielectric-facing fraction for spacing insensitivity.
    OptimizeCutout(Common),
    /// Solve the cross-section field and write the field export.
    SolveField(Common),
    /// Interpolate the inter-chip gap at chip positions.
    GapInterp(Common),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::LineParams(_) => "line-params",
            Command::Freq(_) => "freq",
            Command::Coupling(_) => "coupling",
            Command::Batch(_) => "batch",
            Command::FitLambda(_) => "fit-lambda",
            Command::FitEfflen(_) => "fit-efflen",
            Command::OptimizeCutout(_) => "optimize-cutout",
            Command::SolveField(_) => "solve-field",
            Command::GapInterp(_) => "gap-interp",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::LineParams(c)
            | Command::Freq(c)
            | Command::Coupling(c)
            | Command::Batch(c)
            | Command::FitLambda(c)
            | Command::FitEfflen(c)
            | Command::OptimizeCutout(c)
            | Command::SolveField(c)
            | Command::GapInterp(c) => c,
        }
    }

    fn sweeps(&self) -> bool {
        matches!(self, Command::LineParams(_) | Command::Freq(_) | Command::Coupling(_))
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(v) => format!("{v:.10e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

/// Result table with provenance notes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Extra `#` header lines.
    pub notes: Vec<String>,
}

impl Table {
    fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    /// CSV text with the provenance header.
    pub fn to_csv(&self, command: &str, cfg: &RunConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# flipcpw {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "# command: {command}");
        let _ = writeln!(s, "# config_sha256: {}", cfg.hash());
        let _ = writeln!(s, "# grid: {}", grid_summary(&cfg.solver.grid));
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "{}", self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }
}

fn grid_summary(g: &GridSpec) -> String {
    format!(
        "h_min={} h_far={} growth={} h_max={} lateral={} margin_below={} margin_above={} bisections={}",
        g.h_min.map_or("auto".to_string(), |h| h.to_string()),
        g.h_far,
        g.growth,
        g.h_max,
        g.lateral,
        g.margin_below,
        g.margin_above,
        g.bisections
    )
}

/// Effective configuration after applying the command-line overrides.
pub fn effective_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(m) = &common.method {
        cfg.solver.method = MethodChoice::parse(m)?;
    }
    if let Some(l) = common.lambda_nm {
        cfg.solver.lambda_nm = l;
        cfg.solver.include_kinetic = true;
    }
    if common.include_kinetic {
        cfg.solver.include_kinetic = true;
    }
    if let Some(s) = &common.sweep {
        cfg.sweep = Some(SweepConfig::parse(s)?);
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parse arguments, run, and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Run one verb, writing its output.
pub fn execute(cmd: &Command) -> Result<()> {
    let common = cmd.common();
    let cfg = effective_config(common)?;
    if cfg.sweep.is_some() && !cmd.sweeps() {
        return Err(Error::Config(format!("{} does not take a sweep", cmd.name())));
    }
    if let Command::SolveField(_) = cmd {
        let path = common
            .out
            .clone()
            .or_else(|| cfg.output.field.clone())
            .ok_or_else(|| Error::Config("solve-field needs --out or output.field".into()))?;
        let table = cmd_solve_field(&cfg, &path)?;
        print!("{}", table.to_csv(cmd.name(), &cfg));
        return Ok(());
    }
    let table = match cmd {
        Command::LineParams(_) => cmd_line_params(&cfg)?,
        Command::Freq(_) => cmd_freq(&cfg)?,
        Command::Coupling(_) => cmd_coupling(&cfg)?,
        Command::Batch(_) => cmd_batch(&cfg)?,
        Command::FitLambda(_) => cmd_fit_lambda(&cfg)?,
        Command::FitEfflen(_) => cmd_fit_efflen(&cfg)?,
        Command::OptimizeCutout(_) => cmd_optimize_cutout(&cfg)?,
        Command::GapInterp(_) => cmd_gap_interp(&cfg)?,
        Command::SolveField(_) => unreachable!("handled above"),
    };
    for n in &table.notes {
        if let Some(w) = n.strip_prefix("warning: ") {
            eprintln!("warning: {w}");
        }
    }
    let csv = table.to_csv(cmd.name(), &cfg);
    match common.out.clone().or_else(|| cfg.output.csv.clone()) {
        Some(p) => std::fs::write(&p, csv)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(csv.as_bytes())?;
        }
    }
    Ok(())
}

/// Configurations for every sweep point (a single point without a sweep).
fn sweep_points(cfg: &RunConfig) -> Result<Vec<RunConfig>> {
    match &cfg.sweep {
        None => Ok(vec![cfg.clone()]),
        Some(s) => s.values()?.into_iter().map(|v| cfg.with_var(&s.var, v)).collect(),
    }
}

/// Leading columns naming the sweep variable (when it is not `h_s`).
fn lead_columns(cfg: &RunConfig) -> Vec<String> {
    let mut cols = Vec::new();
    if let Some(s) = &cfg.sweep {
        if s.var != "h_s" {
            cols.push(s.var.clone());
        }
    }
    cols.push("h_s_um".into());
    cols
}

fn lead_cells(base: &RunConfig, point: &RunConfig) -> Result<Vec<Cell>> {
    let mut cells = Vec::new();
    if let Some(s) = &base.sweep {
        if s.var != "h_s" {
            cells.push(Cell::Num(point.var(&s.var)?));
        }
    }
    cells.push(Cell::Num(point.cross_section.h_s));
    Ok(cells)
}

fn evaluate<F>(cfg: &RunConfig, row: F) -> Result<Vec<Vec<Cell>>>
where
    F: Fn(&RunConfig) -> Result<Vec<Cell>> + Sync,
{
    let points = sweep_points(cfg)?;
    let rows: Vec<Result<Vec<Cell>>> = points
        .par_iter()
        .map(|p| {
            let mut cells = lead_cells(cfg, p)?;
            cells.extend(row(p)?);
            Ok(cells)
        })
        .collect();
    rows.into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Route {
    Conformal,
    FieldSolver,
}

/// Line parameters of one facing, optionally with kinetic inductance.
fn facing_params(x: &CrossSection, route: Route, cfg: &RunConfig, kinetic: bool) -> Result<LineParams> {
    let lp = match route {
        Route::Conformal => conformal::line_params(x)?,
        Route::FieldSolver => line_params_fd(x, &cfg.solver.grid)?.params,
    };
    if !kinetic {
        return Ok(lp);
    }
    let l_k = cpw_kinetic_inductance(x, &LondonConfig::new(cfg.solver.lambda_nm), &cfg.solver.grid)?;
    Ok(lp.with_kinetic(l_k))
}

/// Line parameters of the configured cross-section, mixed between facings
/// by the resonator's dielectric-facing fraction when it is nonzero.
fn line_params(cfg: &RunConfig, route: Route, kinetic: bool) -> Result<LineParams> {
    let x = cfg.cross_section();
    let gamma = cfg.resonator.gamma;
    if gamma == 0.0 {
        return facing_params(&x, route, cfg, kinetic);
    }
    let m = facing_params(&x.with_facing(Facing::MetalGround), route, cfg, kinetic)?;
    let d = facing_params(&x.with_facing(Facing::Dielectric), route, cfg, kinetic)?;
    let mix = |a: f64, b: f64| (1.0 - gamma) * a + gamma * b;
    let method = m.method;
    Ok(LineParams::new(mix(m.l_g, d.l_g), mix(m.c, d.c), method).with_kinetic(mix(m.l_k, d.l_k)))
}

fn routes(method: MethodChoice) -> Vec<Route> {
    let mut r = Vec::new();
    if method.conformal() {
        r.push(Route::Conformal);
    }
    if method.field_solver() {
        r.push(Route::FieldSolver);
    }
    r
}

fn route_tag(r: Route) -> &'static str {
    match r {
        Route::Conformal => "conf",
        Route::FieldSolver => "fd",
    }
}

fn conformal_notes(cfg: &RunConfig) -> Vec<String> {
    if !cfg.solver.method.conformal() {
        return Vec::new();
    }
    let mut notes: Vec<String> = sweep_points(cfg)
        .unwrap_or_default()
        .iter()
        .flat_map(|p| conformal::validity_warnings(&p.cross_section()))
        .map(|w| format!("warning: {w}"))
        .collect();
    notes.dedup();
    notes
}

/// Per-point `L` and `C` by each selected route, their relative offsets and
/// optionally the kinetic inductance.
pub fn cmd_line_params(cfg: &RunConfig) -> Result<Table> {
    let rs = routes(cfg.solver.method);
    let kinetic = cfg.solver.include_kinetic;
    let mut cols = lead_columns(cfg);
    for r in &rs {
        cols.push(format!("l_{}_h_per_m", route_tag(*r)));
        cols.push(format!("c_{}_f_per_m", route_tag(*r)));
    }
    if rs.len() == 2 {
        cols.extend(["dl_rel".to_string(), "dc_rel".to_string()]);
    }
    if kinetic {
        cols.push("l_k_h_per_m".into());
    }
    let mut table = Table::new(cols);
    table.rows = evaluate(cfg, |p| {
        let params: Vec<LineParams> = rs.iter().map(|&r| line_params(p, r, false)).collect::<Result<_>>()?;
        let mut cells: Vec<Cell> = params.iter().flat_map(|lp| [Cell::Num(lp.l_g), Cell::Num(lp.c)]).collect();
        if let [conf, fd] = params[..] {
            cells.push(Cell::Num((fd.l_g - conf.l_g) / fd.l_g));
            cells.push(Cell::Num((fd.c - conf.c) / fd.c));
        }
        if kinetic {
            let route = rs.last().copied().unwrap_or(Route::Conformal);
            cells.push(Cell::Num(line_params(p, route, true)?.l_k));
        }
        Ok(cells)
    })?;
    table.notes = conformal_notes(cfg);
    Ok(table)
}

/// Coupling quantities at one configuration with the given bare frequency
/// and resonator impedance.
fn coupling_at(p: &RunConfig, f_bare: f64, zr: f64) -> Result<(crate::fieldsolver::CapMatrix, crate::resonator::CouplingResult)> {
    let r = &p.resonator;
    let feed = FeedlineGeometry {
        w_f: r.w_f,
        s_f: r.s_f,
        d: r.d,
    };
    let (cm, _) = coupling_cap_matrix(&p.cross_section(), &feed, &p.solver.grid)?;
    let c = coupling(&cm, f_bare, r, total_length(r), zr)?;
    Ok((cm, c))
}

/// Resonant frequency by each route, with kinetic inductance on request and
/// the coupling quality factor and shift when the field solver is selected.
pub fn cmd_freq(cfg: &RunConfig) -> Result<Table> {
    let rs = routes(cfg.solver.method);
    let kinetic = cfg.solver.include_kinetic;
    let mut cols = lead_columns(cfg);
    cols.push("l_tot_um".into());
    for r in &rs {
        cols.push(format!("f_{}_hz", route_tag(*r)));
    }
    if kinetic {
        for r in &rs {
            cols.push(format!("f_{}_lk_hz", route_tag(*r)));
        }
    }
    let fd = rs.contains(&Route::FieldSolver);
    if fd {
        cols.extend(["q_c".to_string(), "df_c_hz".to_string()]);
    }
    let mut table = Table::new(cols);
    table.rows = evaluate(cfg, |p| {
        let spec = &p.resonator;
        let l_tot = total_length(spec);
        let mut cells = vec![Cell::Num(l_tot)];
        let mut bare = BTreeMap::new();
        for &r in &rs {
            let lp = line_params(p, r, false)?;
            let f = resonant_frequency(&lp, l_tot, spec.p);
            bare.insert(route_tag(r), (f, lp));
            cells.push(Cell::Num(f));
        }
        if kinetic {
            for &r in &rs {
                let lp = line_params(p, r, true)?;
                cells.push(Cell::Num(resonant_frequency(&lp, l_tot, spec.p)));
            }
        }
        if fd {
            let (f, lp) = bare["fd"];
            let (_, c) = coupling_at(p, f, lp.impedance())?;
            cells.push(c.q_c.into());
            cells.push(Cell::Num(c.df_c));
        }
        Ok(cells)
    })?;
    table.notes = conformal_notes(cfg);
    Ok(table)
}

/// Field-solver capacitance matrix and coupling figures per sweep point. The
/// bare frequency and resonator impedance come from the field solver unless
/// only the conformal route is selected.
pub fn cmd_coupling(cfg: &RunConfig) -> Result<Table> {
    let mut cols = lead_columns(cfg);
    for c in [
        "d_um", "c_rr_f_per_m", "c_ff_f_per_m", "c_rf_f_per_m", "asymmetry", "kappa", "theta_rad", "psi_rad",
        "z2_ohm", "zr_ohm", "f_bare_hz", "q_c", "df_c_hz",
    ] {
        cols.push(c.into());
    }
    let route = if cfg.solver.method == MethodChoice::Conf { Route::Conformal } else { Route::FieldSolver };
    let mut table = Table::new(cols);
    table.rows = evaluate(cfg, |p| {
        let lp = line_params(p, route, p.solver.include_kinetic)?;
        let f = resonant_frequency(&lp, total_length(&p.resonator), p.resonator.p);
        let (cm, c) = coupling_at(p, f, lp.impedance())?;
        Ok(vec![
            Cell::Num(p.resonator.d),
            Cell::Num(cm.c_rr),
            Cell::Num(cm.c_ff),
            Cell::Num(cm.c_rf),
            Cell::Num(cm.asymmetry),
            Cell::Num(c.kappa),
            Cell::Num(c.theta),
            Cell::Num(c.psi),
            Cell::Num(c.z2),
            Cell::Num(c.zr),
            Cell::Num(f),
            c.q_c.into(),
            Cell::Num(c.df_c),
        ])
    })?;
    table.notes.push(format!("bare frequency route: {}", route_tag(route)));
    Ok(table)
}

/// Placed resonators: local gap from the corner map, frequencies by each
/// route, and coupling figures when the field solver is selected.
pub fn cmd_batch(cfg: &RunConfig) -> Result<Table> {
    let rs = routes(cfg.solver.method);
    let kinetic = cfg.solver.include_kinetic;
    let mut cols: Vec<String> = ["name", "x_um", "y_um", "h_s_um", "l_tot_um"].map(String::from).to_vec();
    for r in &rs {
        cols.push(format!("f_{}_hz", route_tag(*r)));
        if kinetic {
            cols.push(format!("f_{}_lk_hz", route_tag(*r)));
        }
    }
    let fd = rs.contains(&Route::FieldSolver);
    if fd {
        cols.extend(["q_c".to_string(), "df_c_hz".to_string()]);
    }
    let mut table = Table::new(cols);
    if cfg.resonators.is_empty() {
        return Ok(table);
    }
    let map = cfg
        .gap_map
        .ok_or_else(|| Error::Config("batch needs a gap_map block".into()))?;
    let gaps: Vec<f64> = cfg.resonators.iter().map(|r| gap_at(&map, r.x, r.y)).collect::<Result<_>>()?;
    let rows: Vec<Result<Vec<Cell>>> = cfg
        .resonators
        .par_iter()
        .zip(gaps.par_iter())
        .map(|(placed, &h_s)| {
            let mut p = cfg.with_var("h_s", h_s)?;
            p.resonator = placed.spec(&cfg.resonator);
            p.resonator.validate().map_err(|e| Error::Config(e.to_string()))?;
            let l_tot = total_length(&p.resonator);
            let mut cells = vec![
                Cell::Text(placed.name.clone()),
                Cell::Num(placed.x),
                Cell::Num(placed.y),
                Cell::Num(h_s),
                Cell::Num(l_tot),
            ];
            let mut fd_bare = None;
            for &r in &rs {
                let lp = line_params(&p, r, false)?;
                let f = resonant_frequency(&lp, l_tot, p.resonator.p);
                cells.push(Cell::Num(f));
                if kinetic {
                    cells.push(Cell::Num(resonant_frequency(&line_params(&p, r, true)?, l_tot, p.resonator.p)));
                }
                if r == Route::FieldSolver {
                    fd_bare = Some((f, lp));
                }
            }
            if let Some((f, lp)) = fd_bare {
                let (_, c) = coupling_at(&p, f, lp.impedance())?;
                cells.push(c.q_c.into());
                cells.push(Cell::Num(c.df_c));
            }
            Ok(cells)
        })
        .collect();
    table.rows = rows.into_iter().collect::<Result<_>>()?;
    Ok(table)
}

fn measured_entry(cfg: &RunConfig, m: &MeasuredResonator, route: Route) -> Result<FitEntry> {
    let mut p = cfg.clone();
    if let Some(h) = m.h_s {
        p.cross_section.h_s = h;
    }
    if let Some(w) = m.w {
        p.cross_section.w = w;
    }
    if let Some(s) = m.s {
        p.cross_section.s = s;
    }
    p.validate()?;
    let x = p.cross_section();
    Ok(FitEntry {
        cross_section: x,
        params: facing_params(&x, route, &p, false)?,
        l_tot_um: m.l_tot.unwrap_or_else(|| total_length(&p.resonator)),
        harmonic: p.resonator.p,
        f_meas: m.f_meas_hz,
    })
}

/// Penetration depth that explains the mean gap between modelled
/// (no kinetic inductance) and measured frequencies.
pub fn cmd_fit_lambda(cfg: &RunConfig) -> Result<Table> {
    if cfg.measured.is_empty() {
        return Err(Error::Config("fit-lambda needs a non-empty 'measured' list".into()));
    }
    let route = if cfg.solver.method == MethodChoice::Fd { Route::FieldSolver } else { Route::Conformal };
    let entries: Vec<FitEntry> = cfg
        .measured
        .iter()
        .map(|m| measured_entry(cfg, m, route))
        .collect::<Result<_>>()?;
    let fit = london::fit_lambda(&entries, &cfg.solver.grid)?;
    let mut table = Table::new(
        ["lambda_nm", "resolvable", "mean_offset_hz", "entries"].map(String::from).to_vec(),
    );
    table.rows.push(vec![
        Cell::Num(fit.lambda_nm),
        Cell::Text(fit.resolvable.to_string()),
        Cell::Num(fit.mean_offset),
        Cell::Int(entries.len() as i64),
    ]);
    table.notes = fit.warnings.iter().map(|w| format!("warning: {w}")).collect();
    Ok(table)
}

/// Effective-length coefficients from `(R, f)` samples.
pub fn cmd_fit_efflen(cfg: &RunConfig) -> Result<Table> {
    let route = if cfg.solver.method == MethodChoice::Fd { Route::FieldSolver } else { Route::Conformal };
    let lp = line_params(cfg, route, cfg.solver.include_kinetic)?;
    let l_r = cfg.eff_length.l_r.unwrap_or_else(|| cfg.resonator.l_r());
    let fit = fit_eff_length(&cfg.eff_length.samples, &lp, l_r)?;
    let mut table = Table::new(
        ["alpha1_per_um", "alpha2", "rms_hz", "l_r_um", "r_um", "pad_length_um"]
            .map(String::from)
            .to_vec(),
    );
    table.rows.push(vec![
        Cell::Num(fit.alpha1),
        Cell::Num(fit.alpha2),
        Cell::Num(fit.rms),
        Cell::Num(l_r),
        Cell::Num(cfg.resonator.r),
        Cell::Num(fit.pad_length(cfg.resonator.r)),
    ]);
    Ok(table)
}

fn mix_tables(cfg: &RunConfig, route: Route) -> Result<MixInput> {
    let c = &cfg.cutout;
    let grid = spacing_grid(c.start, c.stop, c.step).map_err(|e| Error::Config(e.to_string()))?;
    let kinetic = cfg.solver.include_kinetic;
    let base = cfg.cross_section();
    let table = |facing: Facing| -> Result<Vec<LineParams>> {
        grid.par_iter()
            .map(|&h| facing_params(&base.with_spacing(h).with_facing(facing), route, cfg, kinetic))
            .collect()
    };
    MixInput::new(grid.clone(), table(Facing::MetalGround)?, table(Facing::Dielectric)?, kinetic)
}

/// Optimal dielectric-facing fraction and the frequency deviation curve.
pub fn cmd_optimize_cutout(cfg: &RunConfig) -> Result<Table> {
    let mut table = Table::new(
        [
            "method", "h_s_um", "f_rel_deviation", "gamma_opt", "cost_sum", "cost_normalized", "degenerate",
        ]
        .map(String::from)
        .to_vec(),
    );
    for route in routes(cfg.solver.method) {
        let mix = mix_tables(cfg, route)?;
        let opt = optimize_gamma(&mix)?;
        if opt.degenerate {
            table.notes.push(format!("warning: {} cost is flat in gamma", route_tag(route)));
        }
        table.notes.push(format!(
            "{}: gamma_opt={:.6} reference_h_s_um={}",
            route_tag(route),
            opt.gamma,
            opt.reference_h_s
        ));
        for (h, dev) in &opt.deviation {
            table.rows.push(vec![
                Cell::Text(route_tag(route).into()),
                Cell::Num(*h),
                Cell::Num(*dev),
                Cell::Num(opt.gamma),
                Cell::Num(opt.cost.sum),
                Cell::Num(opt.cost.normalized),
                Cell::Text(opt.degenerate.to_string()),
            ]);
        }
    }
    Ok(table)
}

/// Solve the configured cross-section and write the field export: the
/// supercurrent density when kinetic inductance is requested, the potential
/// otherwise. Returns a one-row summary.
pub fn cmd_solve_field(cfg: &RunConfig, path: &std::path::Path) -> Result<Table> {
    let x = cfg.cross_section();
    if cfg.solver.include_kinetic {
        let lc = LondonConfig::new(cfg.solver.lambda_nm);
        let spec = lc.grid_spec(&cfg.solver.grid, x.t);
        let map = cpw_layout(&x, &spec)?;
        let grid = Grid::build(&map, &spec)?;
        let sol = london::solve_current(&map, &grid, &lc)?;
        std::fs::write(path, sol.export().to_text())?;
        let mut t = Table::new(["quantity", "l_k_h_per_m", "nodes"].map(String::from).to_vec());
        t.rows.push(vec![
            Cell::Text("current_density".into()),
            Cell::Num(london::kinetic_inductance(&sol)),
            Cell::Int(grid.node_count() as i64),
        ]);
        t.notes.push(format!("grid_lines: {}", grid.summary()));
        return Ok(t);
    }
    let map = cpw_layout(&x, &cfg.solver.grid)?;
    let grid = Grid::build(&map, &cfg.solver.grid)?;
    let sol = solve_es(&map, &grid, &BTreeMap::from([(RESONATOR, 1.0)]))?;
    std::fs::write(path, sol.export().to_text())?;
    let mut t = Table::new(["quantity", "c_f_per_m", "nodes"].map(String::from).to_vec());
    t.rows.push(vec![
        Cell::Text("potential".into()),
        Cell::Num(sol.charge(RESONATOR)),
        Cell::Int(grid.node_count() as i64),
    ]);
    t.notes.push(format!("grid_lines: {}", grid.summary()));
    Ok(t)
}

/// Interpolated gap at the configured points, or at the placed resonators
/// when no points are given.
pub fn cmd_gap_interp(cfg: &RunConfig) -> Result<Table> {
    let map = cfg
        .gap_map
        .ok_or_else(|| Error::Config("gap-interp needs a gap_map block".into()))?;
    let mut table = Table::new(["name", "x_um", "y_um", "h_s_um"].map(String::from).to_vec());
    let points: Vec<(String, f64, f64)> = if cfg.points.is_empty() {
        cfg.resonators.iter().map(|r| (r.name.clone(), r.x, r.y)).collect()
    } else {
        cfg.points.iter().enumerate().map(|(i, &(x, y))| (format!("p{i}"), x, y)).collect()
    };
    for (name, x, y) in points {
        table.rows.push(vec![Cell::Text(name), Cell::Num(x), Cell::Num(y), Cell::Num(gap_at(&map, x, y)?)]);
    }
    Ok(table)
}
