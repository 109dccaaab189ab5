//! Text formats: density files, key=value reports and CSV tables.
//!
//! Floats are written with 17 significant digits so that files round-trip
//! exactly; no timestamps or host data appear in any body.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use loghls_core::flow::{FlowKind, FlowTrace};
use loghls_core::grid::DEFAULT_TAIL_EXPONENT;
use loghls_core::stationary::StationaryResult;
use loghls_core::{Density, FunctionalReport, RadialGrid};

use crate::error::{HarnessError, Result};

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Ordered `key=value` lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: impl Into<String>, value: f64) -> &mut Self {
        self.entries.push((key.into(), fmt_float(value)));
        self
    }

    pub fn text(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.entries.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| HarnessError::Format {
                line: i + 1,
                message: "expected key=value".into(),
            })?;
            entries.push((k.to_string(), v.to_string()));
        }
        Ok(Self { entries })
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// Comma-separated table with a header row and LF line endings.
#[derive(Debug, Clone, PartialEq)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: impl IntoIterator<Item = f64>) {
        let row: Vec<String> = row.into_iter().map(fmt_float).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn push_raw(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn header(&self) -> &[String] {
        &self.header
    }

    pub fn rows(&self) -> &[Vec<String>] {
        &self.rows
    }

    /// Cell `(row, column name)` parsed as a float.
    pub fn value(&self, row: usize, column: &str) -> Option<f64> {
        let j = self.header.iter().position(|h| h == column)?;
        self.rows.get(row)?.get(j)?.parse().ok()
    }
}

impl std::fmt::Display for Csv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.header.join(","))?;
        for row in &self.rows {
            writeln!(f, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        }
    }
    fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}

/// Writes `contents` to `dir/name` and returns the path.
pub fn emit(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    write_file(&path, contents)?;
    Ok(path)
}

/// `# mass=<M> rmax=<r_max>` followed by `r value` lines. A decay exponent
/// other than the grid default is appended as `tail=<p>` (or `tail=none`).
pub fn density_to_string(f: &Density) -> String {
    let grid = f.grid();
    let mut out = format!("# mass={} rmax={}", fmt_float(f.mass()), fmt_float(grid.r_max()));
    match f.tail_exponent() {
        Some(p) if p == DEFAULT_TAIL_EXPONENT => {}
        Some(p) => out.push_str(&format!(" tail={}", fmt_float(p))),
        None => out.push_str(" tail=none"),
    }
    out.push('\n');
    for (r, v) in grid.nodes().iter().zip(f.values()) {
        let _ = writeln!(out, "{} {}", fmt_float(*r), fmt_float(*v));
    }
    out
}

/// Parses a density file; the nodes become the grid.
pub fn density_from_str(text: &str) -> Result<Density> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(HarnessError::Format { line: 1, message: "empty file".into() })?;
    let mut mass = None;
    let mut rmax = None;
    let mut tail = Some(DEFAULT_TAIL_EXPONENT);
    let body = header
        .strip_prefix('#')
        .ok_or(HarnessError::Format { line: 1, message: "missing '# mass=… rmax=…' header".into() })?;
    for token in body.split_whitespace() {
        let bad = || HarnessError::Format { line: 1, message: format!("bad header token {token:?}") };
        let (k, v) = token.split_once('=').ok_or_else(bad)?;
        if (k, v) == ("tail", "none") {
            tail = None;
            continue;
        }
        let v: f64 = v.parse().map_err(|_| bad())?;
        match k {
            "mass" => mass = Some(v),
            "rmax" => rmax = Some(v),
            "tail" => tail = Some(v),
            _ => return Err(bad()),
        }
    }
    let (mass, rmax) = match (mass, rmax) {
        (Some(m), Some(r)) => (m, r),
        _ => return Err(HarnessError::Format { line: 1, message: "header needs mass and rmax".into() }),
    };
    let mut nodes = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: &str| HarnessError::Format { line: i + 1, message: message.into() };
        let mut parts = line.split_whitespace();
        let r: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad radius"))?;
        let v: f64 = parts.next().and_then(|s| s.parse().ok()).ok_or_else(|| bad("bad value"))?;
        if parts.next().is_some() {
            return Err(bad("expected two columns"));
        }
        nodes.push(r);
        values.push(v);
    }
    if nodes.last().copied() != Some(rmax) {
        return Err(HarnessError::Format { line: 1, message: "rmax does not match the last radius".into() });
    }
    let grid = Arc::new(RadialGrid::from_nodes(nodes)?);
    let density = Density::with_tail(grid, values, tail)?;
    if (density.mass() - mass).abs() > 1e-9 * mass.abs() {
        return Err(HarnessError::Format {
            line: 1,
            message: format!("header mass {mass} disagrees with the profile ({})", density.mass()),
        });
    }
    Ok(density)
}

pub fn read_density(path: &Path) -> Result<Density> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    density_from_str(&text)
}

/// `M, entropy, rel_entropy, potential, interaction, deficit@α…, free_energy`,
/// one row per report; `free_energy` is left empty when it was not evaluated.
pub fn functional_csv(reports: &[FunctionalReport], alphas: &[f64]) -> Csv {
    let mut header: Vec<String> = ["M", "entropy", "rel_entropy", "potential", "interaction"].map(String::from).to_vec();
    header.extend(alphas.iter().map(|a| format!("deficit@{a}")));
    header.push("free_energy".into());
    let mut csv = Csv::new(header);
    for r in reports {
        let mut row = vec![r.mass, r.entropy, r.relative_entropy, r.potential, r.interaction];
        row.extend(alphas.iter().map(|&a| r.deficit_at(a)));
        let mut row: Vec<String> = row.into_iter().map(fmt_float).collect();
        row.push(r.free_energy.map(fmt_float).unwrap_or_default());
        csv.push_raw(row);
    }
    csv
}

pub fn functional_report(report: &FunctionalReport) -> Report {
    let mut out = Report::new();
    out.num("mass", report.mass)
        .num("entropy", report.entropy)
        .num("rel_entropy", report.relative_entropy)
        .num("potential", report.potential)
        .num("interaction", report.interaction);
    for (a, d) in &report.deficits {
        out.num(format!("deficit@{a}"), *d);
    }
    if let Some(fe) = report.free_energy {
        out.num("free_energy", fe);
    }
    out
}

/// `t, mass, entropy, potential, interaction, deficit@α…, free_energy, gn_part, phi_part, dFdt_fd`.
///
/// `free_energy` is the tracked Lyapunov functional: the free energy for the
/// drift-diffusion-Poisson flow and the deficit at the first `α` for the
/// nonlinear flow. `dFdt_fd` is its finite-difference time derivative.
pub fn flow_csv(trace: &FlowTrace, kind: &FlowKind) -> Csv {
    let tracked = trace.tracked(kind);
    let alphas: Vec<f64> = match kind {
        FlowKind::Proof { alphas } => alphas.clone(),
        FlowKind::Ddp { .. } => Vec::new(),
    };
    let mut header: Vec<String> = ["t", "mass", "entropy", "potential", "interaction"].map(String::from).to_vec();
    header.extend(alphas.iter().map(|a| format!("deficit@{a}")));
    header.extend(["free_energy", "gn_part", "phi_part", "dFdt_fd"].map(String::from));
    let mut csv = Csv::new(header);
    for k in 0..trace.times.len() {
        let r = &trace.reports[k];
        let d = &trace.dissipation[k];
        let mut row = vec![trace.times[k], trace.mass[k], r.entropy, r.potential, r.interaction];
        row.extend(alphas.iter().map(|&a| r.deficit_at(a)));
        row.extend([tracked[k], d.gn_part, d.phi_part, trace.dfdt[k]]);
        csv.push(row);
    }
    csv
}

pub fn stationary_report(result: &StationaryResult, j_value: Option<f64>) -> Report {
    let mut out = Report::new();
    out.num("mass", result.mass())
        .num("beta", result.beta)
        .num("gamma", result.gamma())
        .num("residual", result.residual)
        .text("iterations", result.iterations)
        .text("converged", result.converged)
        .text("in_regime", result.in_regime);
    if let Some(j) = j_value {
        out.num("J", j);
    }
    out
}
