//! Scenario files, shipped datasets, and report emission.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linkage::LinkResult;
use crate::mc::{ComparisonReport, McConfig, McReport};
use crate::model::{validate_problem, PlanProblem, PlanSolution, PvParams, Violation};
use crate::pv::PvResult;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub name: String,
    #[serde(default)]
    pub notes: String,
    /// Published figures kept for comparison, never used as inputs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reported: Option<serde_json::Value>,
}

/// Monte Carlo settings stored alongside a scenario's base problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McOverlay {
    pub demand_low_kw: Vec<Vec<f64>>,
    pub demand_high_kw: Vec<Vec<f64>>,
    pub replications: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: String,
    pub metadata: Metadata,
    pub problem: PlanProblem,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pv: Option<PvParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McOverlay>,
}

impl ScenarioFile {
    pub fn mc_config(&self) -> Option<McConfig> {
        self.mc.as_ref().map(|o| McConfig {
            base: self.problem.clone(),
            demand_low: o.demand_low_kw.clone(),
            demand_high: o.demand_high_kw.clone(),
            replications: o.replications,
            seed: o.seed,
        })
    }

    /// Every invariant violation across the problem, PV and Monte Carlo
    /// sections.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = match self.mc_config() {
            // includes the base problem checks
            Some(cfg) => cfg.violations(),
            None => validate_problem(&self.problem),
        };
        if let Some(pv) = &self.pv {
            out.extend(pv.violations());
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unsupported schema_version {found:?}, expected {SCHEMA_VERSION:?}")]
    UnsupportedVersion { found: String },
    #[error("{} invariant violation(s)", .0.len())]
    Invalid(Vec<Violation>),
}

impl ScenarioError {
    /// Stable machine-readable category.
    pub fn category(&self) -> &'static str {
        match self {
            ScenarioError::Io { .. } => "io",
            ScenarioError::Syntax { .. } => "syntax",
            ScenarioError::Schema(_) => "schema",
            ScenarioError::UnsupportedVersion { .. } => "version",
            ScenarioError::Invalid(_) => "invariant",
        }
    }
}

fn classify(e: serde_json::Error) -> ScenarioError {
    use serde_json::error::Category;
    match e.classify() {
        Category::Syntax | Category::Eof => ScenarioError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        },
        Category::Data => ScenarioError::Schema(e.to_string()),
        Category::Io => ScenarioError::Schema(e.to_string()),
    }
}

/// Parses a scenario without checking its invariants.
pub fn parse_scenario(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(classify)?;
    match value.get("schema_version").and_then(|v| v.as_str()) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(ScenarioError::UnsupportedVersion {
                found: other.to_string(),
            })
        }
        None => return Err(ScenarioError::Schema("missing string field `schema_version`".into())),
    }
    serde_json::from_value(value).map_err(classify)
}

/// Parses and validates; any invariant violation fails the load with the
/// complete list.
pub fn parse_and_validate(text: &str) -> Result<ScenarioFile, ScenarioError> {
    let scenario = parse_scenario(text)?;
    let violations = scenario.violations();
    if violations.is_empty() {
        Ok(scenario)
    } else {
        Err(ScenarioError::Invalid(violations))
    }
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioFile, ScenarioError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_and_validate(&text)
}

/// Datasets bundled with the library, by name.
pub const SHIPPED_SCENARIOS: &[(&str, &str)] = &[
    ("table1_low_demand", include_str!("../scenarios/table1_low_demand.json")),
    ("table2_medium_demand", include_str!("../scenarios/table2_medium_demand.json")),
    ("table3_high_demand", include_str!("../scenarios/table3_high_demand.json")),
    ("table4_korea", include_str!("../scenarios/table4_korea.json")),
    ("table4_china", include_str!("../scenarios/table4_china.json")),
    ("table4_taiwan", include_str!("../scenarios/table4_taiwan.json")),
    ("table4_usa", include_str!("../scenarios/table4_usa.json")),
    ("table4_japan", include_str!("../scenarios/table4_japan.json")),
];

pub fn shipped_scenario(name: &str) -> Option<&'static str> {
    SHIPPED_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// Loads a file path, falling back to a shipped scenario of that name.
pub fn resolve_scenario(arg: &str) -> Result<ScenarioFile, ScenarioError> {
    let path = Path::new(arg);
    if !path.exists() {
        if let Some(text) = shipped_scenario(arg) {
            return parse_and_validate(text);
        }
    }
    load_scenario(path)
}

/// One (plant, period) row of a solution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub id: String,
    /// 1-based period.
    pub t: usize,
    #[serde(rename = "Y")]
    pub y: u8,
    #[serde(rename = "Z")]
    pub z: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub period_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionTable {
    pub rows: Vec<SolutionRow>,
    pub per_plant_cost: Vec<f64>,
}

impl SolutionTable {
    pub fn from_solution(problem: &PlanProblem, solution: &PlanSolution) -> Self {
        let mut rows = Vec::new();
        for (j, plant) in problem.plants.iter().enumerate() {
            for t in 0..plant.periods.len() {
                rows.push(SolutionRow {
                    id: plant.id.clone(),
                    t: t + 1,
                    y: solution.selected[j] as u8,
                    z: solution.production[j][t],
                    k: solution.surplus[j][t],
                    period_cost: solution.period_cost[j][t],
                });
            }
        }
        Self {
            rows,
            per_plant_cost: solution.per_plant_cost.clone(),
        }
    }
}

/// Everything a command can report. Absent sections serialize as `null`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportBundle {
    pub scenario: Option<String>,
    pub solution: Option<SolutionTable>,
    pub objective: Option<f64>,
    pub pv: Option<PvResult>,
    pub link: Option<LinkResult>,
    pub mc: Option<McReport>,
    pub comparison: Option<ComparisonReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(ReportError::UnknownFormat(s.to_string())),
        }
    }
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown report format {0:?} (expected text, csv or json)")]
    UnknownFormat(String),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed report: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

const ABSENT: &str = "absent";

/// Fixed two-decimal rendering with thousands separators.
pub fn format_currency(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.2}", x.abs());
    let (int, frac) = s.split_once('.').unwrap_or((&s, "00"));
    let mut grouped = String::new();
    for (i, ch) in int.chars().enumerate() {
        if i > 0 && (int.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(ch);
    }
    let sign = if x < 0.0 && s.bytes().any(|b| b.is_ascii_digit() && b != b'0') {
        "-"
    } else {
        ""
    };
    format!("{sign}{grouped}.{frac}")
}

fn render_text(bundle: &ReportBundle) -> String {
    let mut out = String::new();
    let absent = |out: &mut String, label: &str| {
        let _ = writeln!(out, "{label}: {ABSENT}");
    };
    let _ = writeln!(out, "scenario: {}", bundle.scenario.as_deref().unwrap_or(ABSENT));
    match bundle.objective {
        Some(v) => {
            let _ = writeln!(out, "objective: {}", format_currency(v));
        }
        None => absent(&mut out, "objective"),
    }

    match &bundle.solution {
        Some(table) => {
            let _ = writeln!(
                out,
                "{:<8} {:>2} {:>2} {:>14} {:>14} {:>22}",
                "plant", "t", "Y", "Z", "K", "period_cost"
            );
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "{:<8} {:>2} {:>2} {:>14} {:>14} {:>22}",
                    r.id,
                    r.t,
                    r.y,
                    format_currency(r.z),
                    format_currency(r.k),
                    format_currency(r.period_cost)
                );
            }
        }
        None => absent(&mut out, "solution"),
    }

    match &bundle.pv {
        Some(pv) => {
            let _ = writeln!(out, "rooftop optimum:");
            let _ = writeln!(out, "  beta: {}", pv.beta);
            let _ = writeln!(out, "  z_stationary: {}", pv.z_stationary);
            let _ = writeln!(out, "  z_star: {}", pv.z_star);
            let _ = writeln!(out, "  f_star: {}", format_currency(pv.f_star));
            let _ = writeln!(out, "  |f_star|: {}", format_currency(pv.f_star_magnitude()));
            let _ = writeln!(out, "  panels: {} (buy {})", pv.panels, pv.panels_ceil);
        }
        None => absent(&mut out, "rooftop optimum"),
    }

    match &bundle.link {
        Some(l) => {
            let _ = writeln!(out, "linkage:");
            let _ = writeln!(out, "  z_breakeven: {}", l.z_breakeven);
            let _ = writeln!(out, "  n_star: {} (buy {})", l.n_star, l.n_star_ceil);
            let _ = writeln!(out, "  residual: {:e}", l.residual);
        }
        None => absent(&mut out, "linkage"),
    }

    match &bundle.mc {
        Some(mc) => {
            let _ = writeln!(out, "monte carlo:");
            let _ = writeln!(out, "  replications: {}", mc.replications_run);
            let _ = writeln!(out, "  infeasible: {}", mc.infeasible_count);
            match &mc.cost {
                Some(c) => {
                    let _ = writeln!(out, "  cost_mean: {}", format_currency(c.mean));
                    let _ = writeln!(out, "  cost_stddev: {}", format_currency(c.stddev));
                    let _ = writeln!(out, "  cost_ci95_half_width: {}", format_currency(c.ci95_half_width));
                    let _ = writeln!(
                        out,
                        "  cost_p5/p50/p95: {} / {} / {}",
                        format_currency(c.p5),
                        format_currency(c.p50),
                        format_currency(c.p95)
                    );
                }
                None => absent(&mut out, "  cost statistics"),
            }
            match mc.waste_rate_mean {
                Some(w) => {
                    let _ = writeln!(out, "  waste_rate_mean: {w:.6}");
                }
                None => absent(&mut out, "  waste_rate_mean"),
            }
            match &mc.selection_frequency {
                Some(f) => {
                    let cells: Vec<String> = f.iter().map(|x| format!("{x:.4}")).collect();
                    let _ = writeln!(out, "  selection_frequency: [{}]", cells.join(", "));
                }
                None => absent(&mut out, "  selection_frequency"),
            }
        }
        None => absent(&mut out, "monte carlo"),
    }

    match &bundle.comparison {
        Some(c) => {
            let _ = writeln!(out, "comparison:");
            let _ = writeln!(out, "  plan_cost: {}", format_currency(c.plan_cost));
            let _ = writeln!(out, "  rooftop_cost_magnitude: {}", format_currency(c.pv_cost_magnitude));
            let _ = writeln!(out, "  cheaper: {:?}", c.cheaper);
            let _ = writeln!(out, "  waste_rate: {:.6}", c.waste_rate);
        }
        None => absent(&mut out, "comparison"),
    }
    out
}

fn render_csv(bundle: &ReportBundle) -> Result<String, ReportError> {
    let Some(table) = &bundle.solution else {
        return Ok(format!("# solution: {ABSENT}\n"));
    };
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["id", "t", "Y", "Z", "K", "period_cost"])?;
    for r in &table.rows {
        writer.write_record([
            r.id.clone(),
            r.t.to_string(),
            r.y.to_string(),
            r.z.to_string(),
            r.k.to_string(),
            r.period_cost.to_string(),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn render_report(bundle: &ReportBundle, format: ReportFormat) -> Result<String, ReportError> {
    match format {
        ReportFormat::Text => Ok(render_text(bundle)),
        ReportFormat::Csv => render_csv(bundle),
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(bundle)?;
            s.push('\n');
            Ok(s)
        }
    }
}

pub fn export_report(bundle: &ReportBundle, format: ReportFormat, path: impl AsRef<Path>) -> Result<(), ReportError> {
    let path = path.as_ref();
    let text = render_report(bundle, format)?;
    std::fs::write(path, text).map_err(|source| ReportError::Write {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads back a structured (JSON) report.
pub fn load_report(path: impl AsRef<Path>) -> Result<ReportBundle, ReportError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ReportError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(serde_json::from_str(&text)?)
}
