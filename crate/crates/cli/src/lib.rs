//! Benchmark harness: builds operands, runs product sweeps and renders
//! `h2mmp-csv/1` / `h2mmp-json/1` result tables.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use h2mmp::geometry::{generate_geometry, GeometrySpec, Kernel, KernelKind, KernelMatrix};
use h2mmp::h2::build_h2_from_source;
use h2mmp::htree::{build_block_tree, build_cluster_tree};
use h2mmp::metrics::relative_error;
use h2mmp::{formatted_mmp, mmp, Complex64, H2Matrix, MmpReport, Scalar};
use serde::Serialize;

pub const CSV_FORMAT: &str = "h2mmp-csv/1";
pub const JSON_FORMAT: &str = "h2mmp-json/1";
pub const CSV_COLUMNS: &str =
    "N,leafsize,eta,eps_h2,eps_trunc,mode,eps_rel,flops,memory_scalars,C_sp,max_rank,depth,wall_ms";
/// Overrides the directory results are written to.
pub const OUT_DIR_ENV: &str = "H2MMP_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Invariant(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<h2mmp::Error> for CliError {
    fn from(e: h2mmp::Error) -> Self {
        use h2mmp::Error as E;
        match e {
            E::Config(_) | E::DuplicatePoints { .. } | E::ScalarKind => CliError::Config(e.to_string()),
            E::Io(_) | E::Load { .. } => CliError::Io(e.to_string()),
            _ => CliError::Invariant(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Mmp,
    Formatted,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub kernel: Kernel,
    /// Kernel of the right operand; `None` multiplies `A` by itself.
    pub kernel_b: Option<Kernel>,
    pub leafsize: usize,
    pub eta: f64,
    pub eps_h2: f64,
    pub eps_trunc: Vec<f64>,
    pub mode: Mode,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub vector_seed: u64,
    /// Command line as typed, echoed into the output header.
    #[serde(skip)]
    pub invocation: Option<String>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.leafsize < 1 {
            return bad("leafsize must be at least 1".into());
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if self.eps_trunc.is_empty() && self.mode != Mode::Formatted {
            return bad("eps_trunc list is empty".into());
        }
        for &e in std::iter::once(&self.eps_h2).chain(&self.eps_trunc) {
            if !(e > 0.0 && e < 1.0) {
                return bad(format!("tolerances must lie in (0,1), got {e}"));
            }
        }
        Ok(())
    }

    fn complex(&self) -> bool {
        self.kernel.kind == KernelKind::Helmholtz
            || self.kernel_b.is_some_and(|k| k.kind == KernelKind::Helmholtz)
    }

    /// Normalized parameter line, independent of how flags were spelled.
    pub fn params_line(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// Where results go: `$H2MMP_OUT_DIR/<file name>` if the variable is
    /// set, otherwise the configured path; `None` means stdout.
    pub fn resolved_output(&self) -> Option<PathBuf> {
        resolve_output(self.output.as_deref(), std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
    }
}

fn resolve_output(output: Option<&Path>, dir: Option<PathBuf>) -> Option<PathBuf> {
    match (dir, output) {
        (Some(dir), Some(out)) => Some(dir.join(out.file_name().unwrap_or(out.as_os_str()))),
        (Some(dir), None) => Some(dir.join("h2mmp.csv")),
        (None, out) => out.map(Path::to_path_buf),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(rename = "N")]
    pub n: usize,
    pub leafsize: usize,
    pub eta: f64,
    pub eps_h2: f64,
    pub eps_trunc: f64,
    pub mode: &'static str,
    pub eps_rel: f64,
    pub flops: u64,
    pub memory_scalars: usize,
    #[serde(rename = "C_sp")]
    pub csp: usize,
    pub max_rank: usize,
    pub depth: usize,
    pub wall_ms: f64,
}

/// Builds the operands and computes one row per `(eps_trunc, mode)`; the
/// formatted product does not depend on `eps_trunc` and is computed once.
pub fn execute(config: &RunConfig) -> Result<Vec<Row>, CliError> {
    config.validate()?;
    if config.complex() {
        execute_typed::<Complex64>(config)
    } else {
        execute_typed::<f64>(config)
    }
}

fn execute_typed<T: Scalar>(config: &RunConfig) -> Result<Vec<Row>, CliError> {
    let points = generate_geometry(&config.geometry)?;
    let tree = build_cluster_tree(&points, config.leafsize)?;
    let structure = std::sync::Arc::new(build_block_tree(&tree, config.eta)?);
    let source = KernelMatrix::new(points.clone(), config.kernel)?;
    let a: H2Matrix<T> = build_h2_from_source(&source, structure.clone(), config.eps_h2)?;
    let b_owned = match config.kernel_b {
        Some(k) => {
            let source = KernelMatrix::new(points, k)?;
            Some(build_h2_from_source::<T, _>(&source, structure.clone(), config.eps_h2)?)
        }
        None => None,
    };
    let b = b_owned.as_ref().unwrap_or(&a);

    let row = |eps_trunc: f64, mode: &'static str, c: &H2Matrix<T>, r: &MmpReport, wall: f64| {
        let err = relative_error(&a, b, c, config.vector_seed)?;
        if !err.value.is_finite() {
            return Err(CliError::Invariant(format!("non-finite error for {mode} at {eps_trunc}")));
        }
        Ok(Row {
            n: a.size(),
            leafsize: config.leafsize,
            eta: config.eta,
            eps_h2: config.eps_h2,
            eps_trunc,
            mode,
            eps_rel: err.value,
            flops: r.flops,
            memory_scalars: c.memory_footprint(),
            csp: r.csp,
            depth: a.tree().depth(),
            max_rank: c.max_rank(),
            wall_ms: wall,
        })
    };

    let formatted = if config.mode != Mode::Mmp {
        let start = Instant::now();
        let (c, report) = formatted_mmp(&a, b)?;
        let wall = start.elapsed().as_secs_f64() * 1e3;
        check(&c, &report)?;
        Some((c, report, wall))
    } else {
        None
    };

    let mut rows = Vec::new();
    for &eps in &config.eps_trunc {
        if config.mode != Mode::Formatted {
            let start = Instant::now();
            let (c, report) = mmp(&a, b, eps)?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            check(&c, &report)?;
            rows.push(row(eps, "mmp", &c, &report, wall)?);
        }
        if let Some((c, report, wall)) = &formatted {
            rows.push(row(eps, "formatted", c, report, *wall)?);
        }
    }
    Ok(rows)
}

fn check<T: Scalar>(c: &H2Matrix<T>, report: &MmpReport) -> Result<(), CliError> {
    report.check_bounds()?;
    let (nested, ortho) = c.basis_defects();
    if nested > 1e-10 || ortho > 1e-10 {
        return Err(CliError::Invariant(format!(
            "product bases defective: nestedness {nested:e}, orthonormality {ortho:e}"
        )));
    }
    Ok(())
}

pub fn render_csv(config: &RunConfig, rows: &[Row]) -> String {
    let mut s = format!("# {CSV_FORMAT}\n");
    if let Some(inv) = &config.invocation {
        let _ = writeln!(s, "# args: {inv}");
    }
    let _ = writeln!(s, "# params: {}", config.params_line());
    s.push_str(CSV_COLUMNS);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:e},{:e},{},{:e},{},{},{},{},{},{:.3}",
            r.n,
            r.leafsize,
            r.eta,
            r.eps_h2,
            r.eps_trunc,
            r.mode,
            r.eps_rel,
            r.flops,
            r.memory_scalars,
            r.csp,
            r.max_rank,
            r.depth,
            r.wall_ms
        );
    }
    s
}

pub fn render_json(config: &RunConfig, rows: &[Row]) -> String {
    #[derive(Serialize)]
    struct Doc<'a> {
        format: &'static str,
        #[serde(skip_serializing_if = "Option::is_none")]
        args: Option<&'a str>,
        params: &'a RunConfig,
        rows: &'a [Row],
    }
    let doc = Doc {
        format: JSON_FORMAT,
        args: config.invocation.as_deref(),
        params: config,
        rows,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("rows serialize");
    s.push('\n');
    s
}

pub fn render(config: &RunConfig, rows: &[Row]) -> String {
    match config.format {
        Format::Csv => render_csv(config, rows),
        Format::Json => render_json(config, rows),
    }
}

/// Runs `config` and writes the rendered table; returns the text.
pub fn run(config: &RunConfig) -> Result<String, CliError> {
    let rows = execute(config)?;
    let text = render(config, &rows);
    if let Some(path) = config.resolved_output() {
        write_file(&path, &text)?;
    }
    Ok(text)
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Drops the `wall_ms` column so two tables can be compared byte for byte.
pub fn strip_wall_time(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            if l.starts_with('#') {
                l.to_string()
            } else {
                l.rsplit_once(',').map_or(l, |(head, _)| head).to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}
