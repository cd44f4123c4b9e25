//! Batch experiments: grids of (degree, level) cells for one geometry,
//! family list, transform and preconditioner, written as CSV or as
//! markdown tables.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::info;
use serde::Serialize;

use crate::discretization::{
    assemble_saddle, eliminate_dirichlet, l2_error, l2_orthogonal_pressure, pressure_kernel, Family, ManufacturedSolution, SaddleSystem,
    StokesSpaces, Transform,
};
use crate::error::{Error, Result};
use crate::geometry::{quarter_annulus_map, unit_square_map, GeometryMap};
use crate::solvers::{
    build_preconditioner, direct_solve_with_kernel, minres, MinresOptions, PreconditionerConfig, SolveReport, StoppingRule,
    VelocityStrategy,
};

/// Computational domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeometryKind {
    Square,
    Annulus,
}

impl GeometryKind {
    pub fn map(self) -> GeometryMap {
        match self {
            GeometryKind::Square => unit_square_map(),
            GeometryKind::Annulus => quarter_annulus_map(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GeometryKind::Square => "square",
            GeometryKind::Annulus => "annulus",
        }
    }
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeometryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "square" | "unit_square" => Ok(GeometryKind::Square),
            "annulus" | "quarter_annulus" => Ok(GeometryKind::Annulus),
            _ => Err(Error::Parameter(format!("unknown geometry '{s}'"))),
        }
    }
}

/// Stopping rule of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopSpec {
    /// Error reduction against a direct reference solution.
    Error(f64),
    /// Preconditioned residual reduction.
    Residual(f64),
}

impl StopSpec {
    pub fn label(&self) -> String {
        match self {
            StopSpec::Error(t) => format!("error {t:e}"),
            StopSpec::Residual(t) => format!("residual {t:e}"),
        }
    }
}

impl FromStr for StopSpec {
    type Err = Error;
    /// `error`, `residual`, `error:1e-10`, `residual:1e-8`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (kind, tol) = match s.split_once(':') {
            Some((k, t)) => {
                let tol: f64 = t.parse().map_err(|_| Error::Parameter(format!("bad tolerance '{t}'")))?;
                (k.to_string(), tol)
            }
            None => (s.clone(), 1e-6),
        };
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Parameter(format!("tolerance {tol} must lie in (0, 1)")));
        }
        match kind.as_str() {
            "error" => Ok(StopSpec::Error(tol)),
            "residual" => Ok(StopSpec::Residual(tol)),
            _ => Err(Error::Parameter(format!("unknown stopping rule '{s}'"))),
        }
    }
}

/// One experiment grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub geometry: GeometryKind,
    pub families: Vec<Family>,
    pub transform: Transform,
    pub degrees: Vec<usize>,
    pub levels: Vec<usize>,
    pub precond: VelocityStrategy,
    /// Overrides the per-family default when set.
    pub beta: Option<f64>,
    /// Overrides the per-family default when set.
    pub damping_scale: Option<f64>,
    pub stop: StopSpec,
    pub max_iters: usize,
    /// Largest system for which the reference solution of error-based
    /// stopping is computed by sparse LU; bigger cells obtain it from a
    /// tightly converged preconditioned MINRES run.
    pub reference_budget: usize,
    /// Largest system that is attempted at all; bigger cells are reported
    /// as out of memory.
    pub max_dofs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            geometry: GeometryKind::Square,
            families: vec![Family::TaylorHood],
            transform: Transform::Direct,
            degrees: vec![2],
            levels: vec![4],
            precond: VelocityStrategy::ScmsMg,
            beta: None,
            damping_scale: None,
            stop: StopSpec::Error(1e-6),
            max_iters: 1000,
            reference_budget: 40_000,
            max_dofs: 400_000,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.degrees.is_empty() || self.levels.is_empty() {
            return Err(Error::Config("families, degrees and levels must be nonempty".into()));
        }
        if let Some(&p) = self.degrees.iter().find(|&&p| p < 2) {
            return Err(Error::Config(format!("degree parameter {p} must be at least 2")));
        }
        if let Some(&l) = self.levels.iter().find(|&&l| !(2..=12).contains(&l)) {
            return Err(Error::Config(format!("level {l} must lie in 2..=12")));
        }
        if self.precond == VelocityStrategy::ScmsMgGeo && self.transform == Transform::Piola {
            return Err(Error::Config(
                "scms_mg_geo is unavailable for the Piola transform (no rank-one geometry approximation)".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be positive".into()));
        }
        if let Some(b) = self.beta {
            if !(b > 0.0) {
                return Err(Error::Config(format!("beta {b} must be positive")));
            }
        }
        if let Some(d) = self.damping_scale {
            if !(d > 0.0) {
                return Err(Error::Config(format!("damping scale {d} must be positive")));
            }
        }
        Ok(())
    }

    /// Effective preconditioner settings for one family.
    pub fn preconditioner(&self, family: Family) -> PreconditionerConfig {
        let mut c = PreconditionerConfig::defaults(self.precond, family, self.transform);
        if let Some(b) = self.beta {
            c.beta = b;
        }
        if let Some(d) = self.damping_scale {
            c.damping_scale = d;
        }
        c
    }
}

/// Outcome class of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Converged,
    /// Iteration cap reached (">1k" in tables when the cap is 1000).
    CapExceeded,
    /// Beyond the configured size budget ("OoM").
    OutOfMemory,
}

/// One row of the result table.
#[derive(Debug, Clone, PartialEq)]
pub struct CellReport {
    pub geometry: GeometryKind,
    pub family: Family,
    pub transform: Transform,
    pub p: usize,
    pub level: usize,
    pub precond: VelocityStrategy,
    pub beta: f64,
    pub damping_scale: f64,
    pub dofs: usize,
    pub iterations: usize,
    pub status: CellStatus,
    pub err_v: Option<f64>,
    pub err_p: Option<f64>,
    pub seconds: f64,
    /// The stopping rule used for the cell.
    pub stop: StopSpec,
}

impl CellReport {
    pub fn converged(&self) -> bool {
        self.status == CellStatus::Converged
    }
}

/// Residual reduction of the iterative reference solution.
pub const ITERATIVE_REFERENCE_TOL: f64 = 1e-13;

/// Assembled problem for one cell.
pub struct StokesProblem {
    pub spaces: StokesSpaces,
    pub map: GeometryMap,
    pub exact: ManufacturedSolution,
    pub system: SaddleSystem,
    /// Orthonormal basis of the pressure kernel (pressure coefficients only).
    pub pressure_kernel: Vec<Vec<f64>>,
}

impl StokesProblem {
    pub fn new(geometry: GeometryKind, family: Family, transform: Transform, p: usize, level: usize) -> Result<Self> {
        let spaces = StokesSpaces::new(family, transform, p, level)?;
        let map = geometry.map();
        let exact = ManufacturedSolution::new(&map)?;
        let full = assemble_saddle(&spaces, &map, &exact)?;
        let system = eliminate_dirichlet(&full)?;
        let pressure_kernel = pressure_kernel(&system)?;
        Ok(StokesProblem { spaces, map, exact, system, pressure_kernel })
    }

    pub fn dofs(&self) -> usize {
        self.system.total_dofs()
    }

    pub fn reference_solution(&self) -> Result<Vec<f64>> {
        direct_solve_with_kernel(&self.system, &self.pressure_kernel)
    }

    /// Reference solution from preconditioned MINRES driven to a residual
    /// reduction of `tol`, for systems too large for sparse LU.
    pub fn iterative_reference(&self, config: &PreconditionerConfig, tol: f64, max_iters: usize) -> Result<Vec<f64>> {
        let (x, report) = self.solve(config, StoppingRule::ResidualReduction { tol }, max_iters)?;
        if !report.converged {
            return Err(Error::Numerical(format!(
                "reference iteration stalled at residual reduction {:.1e} after {} steps",
                report.final_reduction(),
                report.iterations
            )));
        }
        Ok(x)
    }

    /// The pressure kernel embedded in the full unknown vector.
    pub fn kernel(&self) -> Vec<Vec<f64>> {
        let nv = self.system.num_velocity();
        self.pressure_kernel
            .iter()
            .map(|k| {
                let mut v = vec![0.0; nv];
                v.extend_from_slice(k);
                v
            })
            .collect()
    }

    /// Preconditioned MINRES from a zero initial guess.
    pub fn solve(
        &self,
        config: &PreconditionerConfig,
        stop: StoppingRule,
        max_iters: usize,
    ) -> Result<(Vec<f64>, SolveReport)> {
        let precond = build_preconditioner(config, &self.spaces, &self.map, &self.system)?;
        let options = MinresOptions { stop, max_iters, kernel: self.kernel() };
        minres(&self.system, &self.system.rhs(), &precond, &options)
    }

    /// L² errors of a reduced solution vector (free velocity, pressure); the
    /// pressure is taken modulo its kernel, in its L²-minimal representative.
    pub fn errors(&self, x: &[f64]) -> Result<(f64, f64)> {
        let nv = self.system.num_velocity();
        let velocity = self.system.expand_velocity(&x[..nv])?;
        let pressure = l2_orthogonal_pressure(&self.system.pressure_mass, &self.pressure_kernel, &x[nv..])?;
        l2_error(&velocity, &pressure, &self.spaces, &self.map, &self.exact)
    }
}

/// Runs one (family, p, level) cell.
pub fn run_cell(config: &ExperimentConfig, family: Family, p: usize, level: usize) -> Result<CellReport> {
    let pc = config.preconditioner(family);
    let spaces = StokesSpaces::new(family, config.transform, p, level)?;
    let dofs = spaces.total_dofs();
    let mut report = CellReport {
        geometry: config.geometry,
        family,
        transform: config.transform,
        p,
        level,
        precond: config.precond,
        beta: pc.beta,
        damping_scale: pc.damping_scale,
        dofs,
        iterations: 0,
        status: CellStatus::OutOfMemory,
        err_v: None,
        err_p: None,
        seconds: 0.0,
        stop: config.stop,
    };
    if dofs > config.max_dofs {
        info!("{family} p={p} level={level}: {dofs} unknowns exceed the budget of {}", config.max_dofs);
        return Ok(report);
    }
    let problem = StokesProblem::new(config.geometry, family, config.transform, p, level)?;
    let stop = match config.stop {
        StopSpec::Error(tol) if dofs <= config.reference_budget => {
            StoppingRule::ErrorReduction { reference: problem.reference_solution()?, tol }
        }
        StopSpec::Error(tol) => {
            info!("{family} p={p} level={level}: {dofs} unknowns exceed the LU budget; iterating for the reference");
            let reference = problem.iterative_reference(&pc, ITERATIVE_REFERENCE_TOL, 20 * config.max_iters)?;
            StoppingRule::ErrorReduction { reference, tol }
        }
        StopSpec::Residual(tol) => StoppingRule::ResidualReduction { tol },
    };
    let (x, solve) = problem.solve(&pc, stop, config.max_iters)?;
    let (ev, ep) = problem.errors(&x)?;
    report.iterations = solve.iterations;
    report.status = if solve.converged { CellStatus::Converged } else { CellStatus::CapExceeded };
    report.err_v = Some(ev);
    report.err_p = Some(ep);
    report.seconds = solve.seconds;
    info!(
        "{family} p={p} level={level}: {} iterations ({:?}), err_v={ev:.2e}, err_p={ep:.2e}",
        solve.iterations, report.status
    );
    Ok(report)
}

/// Runs every cell of the grid; cells are ordered by family, level, degree.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CellReport>> {
    config.validate()?;
    let mut out = Vec::new();
    for &family in &config.families {
        for &level in &config.levels {
            for &p in &config.degrees {
                out.push(run_cell(config, family, p, level)?);
            }
        }
    }
    Ok(out)
}

/// Output format of [`emit_table`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            _ => Err(Error::Parameter(format!("unknown format '{s}'"))),
        }
    }
}

#[derive(Serialize)]
struct CsvRow {
    geometry: &'static str,
    family: &'static str,
    transform: String,
    p: usize,
    level: usize,
    precond: &'static str,
    beta: f64,
    damping_scale: f64,
    dofs: usize,
    iterations: String,
    converged: bool,
    err_v: String,
    err_p: String,
    seconds: String,
}

fn sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

/// Writes the CSV form; `with_timing = false` leaves the `seconds` column
/// empty so that identical runs produce identical files.
pub fn write_csv<W: Write>(reports: &[CellReport], with_timing: bool, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in reports {
        w.serialize(CsvRow {
            geometry: r.geometry.name(),
            family: r.family.short_name(),
            transform: r.transform.to_string(),
            p: r.p,
            level: r.level,
            precond: r.precond.name(),
            beta: r.beta,
            damping_scale: r.damping_scale,
            dofs: r.dofs,
            iterations: if r.status == CellStatus::OutOfMemory { String::new() } else { r.iterations.to_string() },
            converged: r.converged(),
            err_v: sci(r.err_v),
            err_p: sci(r.err_p),
            seconds: if with_timing { format!("{:.3}", r.seconds) } else { String::new() },
        })?;
    }
    w.flush()?;
    Ok(())
}

fn iteration_marker(r: &CellReport) -> String {
    match r.status {
        CellStatus::Converged => r.iterations.to_string(),
        CellStatus::CapExceeded if r.iterations == 1000 => ">1k".into(),
        CellStatus::CapExceeded => format!(">{}", r.iterations),
        CellStatus::OutOfMemory => "OoM".into(),
    }
}

fn short_sci(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.0e}")).unwrap_or_else(|| "–".into())
}

/// Markdown tables in the layout `rows = ℓ, columns = p`, one column
/// block per family: iteration counts first, then sizes and errors.
pub fn markdown_table(reports: &[CellReport]) -> String {
    let mut families: Vec<Family> = Vec::new();
    let mut degrees: Vec<usize> = Vec::new();
    let mut levels: Vec<usize> = Vec::new();
    for r in reports {
        if !families.contains(&r.family) {
            families.push(r.family);
        }
        if !degrees.contains(&r.p) {
            degrees.push(r.p);
        }
        if !levels.contains(&r.level) {
            levels.push(r.level);
        }
    }
    degrees.sort_unstable();
    levels.sort_unstable();
    let find = |f: Family, p: usize, l: usize| reports.iter().find(|r| r.family == f && r.p == p && r.level == l);
    let mut out = String::new();
    if let Some(first) = reports.first() {
        out.push_str(&format!(
            "Iteration counts: {} ({}), MINRES with {}, stopping on {}\n\n",
            first.geometry,
            first.transform,
            first.precond.label(),
            first.stop.label()
        ));
    }
    // iteration table
    out.push_str("| ℓ \\ p |");
    for f in &families {
        for p in &degrees {
            out.push_str(&format!(" {} {} |", f.short_name(), p));
        }
    }
    out.push_str("\n|---|");
    for _ in 0..families.len() * degrees.len() {
        out.push_str("---:|");
    }
    out.push('\n');
    for &l in &levels {
        out.push_str(&format!("| {l} |"));
        for &f in &families {
            for &p in &degrees {
                let cell = find(f, p, l).map(iteration_marker).unwrap_or_default();
                out.push_str(&format!(" {cell} |"));
            }
        }
        out.push('\n');
    }
    // sizes and errors
    out.push_str("\nProblem size and L2 errors\n\n| p | ℓ |");
    for f in &families {
        out.push_str(&format!(" {0} dof | {0} v | {0} p |", f.short_name()));
    }
    out.push_str("\n|---|---|");
    for _ in &families {
        out.push_str("---:|---:|---:|");
    }
    out.push('\n');
    for &p in &degrees {
        for &l in &levels {
            out.push_str(&format!("| {p} | {l} |"));
            for &f in &families {
                match find(f, p, l) {
                    Some(r) => out.push_str(&format!(" {} | {} | {} |", r.dofs, short_sci(r.err_v), short_sci(r.err_p))),
                    None => out.push_str(" | | |"),
                }
            }
            out.push('\n');
        }
    }
    out
}

/// Writes reports in the requested format.
pub fn emit_table<W: Write>(reports: &[CellReport], format: TableFormat, with_timing: bool, mut writer: W) -> Result<()> {
    if reports.is_empty() {
        return Err(Error::Config("no reports to write".into()));
    }
    match format {
        TableFormat::Csv => write_csv(reports, with_timing, writer),
        TableFormat::Markdown => {
            writer.write_all(markdown_table(reports).as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(status: CellStatus, iterations: usize) -> CellReport {
        CellReport {
            geometry: GeometryKind::Square,
            family: Family::TaylorHood,
            transform: Transform::Direct,
            p: 2,
            level: 4,
            precond: VelocityStrategy::ScmsMg,
            beta: 0.05,
            damping_scale: 0.04,
            dofs: 2372,
            iterations,
            status,
            err_v: Some(2e-5),
            err_p: Some(1e-5),
            seconds: 0.5,
            stop: StopSpec::Error(1e-6),
        }
    }

    #[test]
    fn stop_spec_parsing() {
        assert_eq!("error".parse::<StopSpec>().unwrap(), StopSpec::Error(1e-6));
        assert_eq!("residual:1e-8".parse::<StopSpec>().unwrap(), StopSpec::Residual(1e-8));
        assert!("error:2".parse::<StopSpec>().is_err());
        assert!("banana".parse::<StopSpec>().is_err());
    }

    #[test]
    fn piola_geo_is_rejected() {
        let c = ExperimentConfig {
            geometry: GeometryKind::Annulus,
            transform: Transform::Piola,
            precond: VelocityStrategy::ScmsMgGeo,
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn markers() {
        assert_eq!(iteration_marker(&report(CellStatus::CapExceeded, 1000)), ">1k");
        assert_eq!(iteration_marker(&report(CellStatus::OutOfMemory, 0)), "OoM");
        assert_eq!(iteration_marker(&report(CellStatus::Converged, 55)), "55");
    }

    #[test]
    fn single_report_gives_one_cell_table() {
        let md = markdown_table(&[report(CellStatus::Converged, 55)]);
        assert!(md.contains("| 4 | 55 |"));
        assert!(md.contains("| 2 | 4 | 2372 | 2e-5 | 1e-5 |"));
    }

    #[test]
    fn csv_has_documented_columns() {
        let mut buf = Vec::new();
        write_csv(&[report(CellStatus::Converged, 55)], false, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(
            header,
            "geometry,family,transform,p,level,precond,beta,damping_scale,dofs,iterations,converged,err_v,err_p,seconds"
        );
        assert!(text.lines().nth(1).unwrap().starts_with("square,TH,direct,2,4,scms_mg,0.05,0.04,2372,55,true,"));
    }
}
