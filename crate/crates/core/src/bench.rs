//! Benchmark scenarios: run several planners on identical start/goal pairs,
//! collect per-run metrics and aggregate them into report tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::grid_model::{
    CellCoord, Cost3DParams, ElevationEncoding, ElevationField, GridError, Path, WeightEncoding, WeightedGrid,
};
use crate::planner::{run_planner, PlannerKind, PlannerParams, PlannerSpec};
use crate::planning::PlanError;
use crate::raster_io::{load_grayscale_raster, RasterError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid scenario file:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("scenario {scenario:?}: {source}")]
    Raster {
        scenario: String,
        #[source]
        source: RasterError,
    },
    #[error("scenario {scenario:?}: {source}")]
    Grid {
        scenario: String,
        #[source]
        source: GridError,
    },
    #[error("scenario {scenario:?}, planner {planner}: {source}")]
    Plan {
        scenario: String,
        planner: String,
        #[source]
        source: PlanError,
    },
    #[error("{0}")]
    Empty(&'static str),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn io_err(path: &FsPath) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// One planner entry of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannerEntry {
    pub spec: PlannerSpec,
    /// Name used in records and tables; defaults to the kind's label.
    pub label: String,
}

impl PlannerEntry {
    pub fn new(kind: PlannerKind) -> Self {
        PlannerEntry {
            spec: PlannerSpec::new(kind),
            label: kind.label().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub weight_map: PathBuf,
    pub elevation_map: Option<PathBuf>,
    pub weights: WeightEncoding,
    pub elevation: ElevationEncoding,
    pub start: CellCoord,
    pub goal: CellCoord,
    pub planners: Vec<PlannerEntry>,
    pub repeats: usize,
    pub base_seed: u64,
}

pub const DEFAULT_REPEATS: usize = 5;

const SCENARIO_FIELDS: [&str; 10] = [
    "name",
    "weight_map",
    "elevation_map",
    "weights",
    "elevation",
    "start",
    "goal",
    "planners",
    "repeats",
    "base_seed",
];
const ENTRY_FIELDS: [&str; 4] = ["planner", "params", "label", "cost3d"];

/// Field-by-field validation that reports every problem it finds.
struct Checker {
    problems: Vec<String>,
}

impl Checker {
    fn field<T: for<'de> Deserialize<'de>>(
        &mut self,
        obj: &Map<String, Value>,
        ctx: &str,
        key: &str,
        required: bool,
    ) -> Option<T> {
        match obj.get(key) {
            None if required => {
                self.problems.push(format!("{ctx}: missing field `{key}`"));
                None
            }
            None => None,
            Some(v) => match serde_json::from_value::<T>(v.clone()) {
                Ok(t) => Some(t),
                Err(e) => {
                    self.problems.push(format!("{ctx}: field `{key}`: {e}"));
                    None
                }
            },
        }
    }

    fn unknown(&mut self, obj: &Map<String, Value>, ctx: &str, known: &[&str]) {
        for k in obj.keys() {
            if !known.contains(&k.as_str()) {
                self.problems.push(format!("{ctx}: unknown field `{k}`"));
            }
        }
    }

    fn scenario(&mut self, v: &Value, index: usize, base_dir: &FsPath) -> Option<Scenario> {
        let Some(obj) = v.as_object() else {
            self.problems.push(format!("scenario #{index}: expected an object"));
            return None;
        };
        let name: Option<String> = self.field(obj, &format!("scenario #{index}"), "name", true);
        let ctx = match &name {
            Some(n) => format!("scenario {n:?}"),
            None => format!("scenario #{index}"),
        };
        self.unknown(obj, &ctx, &SCENARIO_FIELDS);
        let weight_map: Option<PathBuf> = self.field(obj, &ctx, "weight_map", true);
        let elevation_map: Option<PathBuf> = self.field(obj, &ctx, "elevation_map", false);
        let weights: Option<WeightEncoding> = self.field(obj, &ctx, "weights", false);
        let elevation: Option<ElevationEncoding> = self.field(obj, &ctx, "elevation", false);
        let start: Option<CellCoord> = self.field(obj, &ctx, "start", true);
        let goal: Option<CellCoord> = self.field(obj, &ctx, "goal", true);
        let repeats: Option<usize> = self.field(obj, &ctx, "repeats", false);
        let base_seed: Option<u64> = self.field(obj, &ctx, "base_seed", false);
        if repeats == Some(0) {
            self.problems.push(format!("{ctx}: field `repeats`: must be at least 1"));
        }

        let problems_before = self.problems.len();
        let mut planners = Vec::new();
        match obj.get("planners").map(|p| p.as_array()) {
            None => self.problems.push(format!("{ctx}: missing field `planners`")),
            Some(None) => self.problems.push(format!("{ctx}: field `planners`: expected an array")),
            Some(Some(list)) if list.is_empty() => {
                self.problems.push(format!("{ctx}: field `planners`: must list at least one planner"))
            }
            Some(Some(list)) => {
                for (i, entry) in list.iter().enumerate() {
                    if let Some(e) = self.entry(entry, &format!("{ctx}, planners[{i}]")) {
                        planners.push(e);
                    }
                }
            }
        }
        if elevation_map.is_none() && obj.get("elevation_map").is_none() {
            let needs: Vec<_> = planners
                .iter()
                .filter(|e: &&PlannerEntry| e.spec.kind.is_3d())
                .map(|e| e.spec.kind.id())
                .collect();
            if !needs.is_empty() {
                self.problems.push(format!(
                    "{ctx}: 3D planners ({}) require field `elevation_map`",
                    needs.join(", ")
                ));
            }
        }
        let mut seen = BTreeMap::new();
        for e in &planners {
            if seen.insert(e.label.clone(), ()).is_some() {
                self.problems
                    .push(format!("{ctx}: duplicate planner label {:?}; set distinct `label`s", e.label));
            }
        }
        if self.problems.len() > problems_before {
            return None;
        }

        Some(Scenario {
            name: name?,
            weight_map: base_dir.join(weight_map?),
            elevation_map: elevation_map.map(|p| base_dir.join(p)),
            weights: weights.unwrap_or_default(),
            elevation: elevation.unwrap_or_default(),
            start: start?,
            goal: goal?,
            planners,
            repeats: repeats.unwrap_or(DEFAULT_REPEATS),
            base_seed: base_seed.unwrap_or(0),
        })
    }

    fn entry(&mut self, v: &Value, ctx: &str) -> Option<PlannerEntry> {
        let Some(obj) = v.as_object() else {
            self.problems.push(format!("{ctx}: expected an object"));
            return None;
        };
        self.unknown(obj, ctx, &ENTRY_FIELDS);
        let kind: Option<PlannerKind> = self.field(obj, ctx, "planner", true);
        let label: Option<String> = self.field(obj, ctx, "label", false);
        let cost3d: Option<Cost3DParams> = self.field(obj, ctx, "cost3d", false);
        if let Some(c) = &cost3d {
            if let Err(e) = c.validate() {
                self.problems.push(format!("{ctx}: field `cost3d`: {e}"));
            }
        }
        let kind = kind?;
        let params = match PlannerParams::from_json(kind, obj.get("params").unwrap_or(&Value::Null)) {
            Ok(p) => p,
            Err(e) => {
                self.problems.push(format!("{ctx}: field `params`: {e}"));
                return None;
            }
        };
        Some(PlannerEntry {
            spec: PlannerSpec {
                kind,
                params,
                cost3d: cost3d.unwrap_or_default(),
            },
            label: label.unwrap_or_else(|| kind.label().to_string()),
        })
    }
}

/// Parse scenario JSON: either `{"scenarios": [...]}` or a single scenario
/// object. Relative map paths resolve against `base_dir`.
pub fn parse_scenarios(text: &str, base_dir: &FsPath) -> Result<Vec<Scenario>, BenchError> {
    let root: Value =
        serde_json::from_str(text).map_err(|e| BenchError::Invalid(vec![format!("not valid JSON: {e}")]))?;
    let items: Vec<Value> = match root.get("scenarios") {
        Some(Value::Array(list)) => list.clone(),
        Some(_) => return Err(BenchError::Invalid(vec!["field `scenarios`: expected an array".into()])),
        None => vec![root],
    };
    if items.is_empty() {
        return Err(BenchError::Invalid(vec!["no scenarios given".into()]));
    }
    let mut checker = Checker { problems: Vec::new() };
    let scenarios: Vec<_> = items
        .iter()
        .enumerate()
        .filter_map(|(i, v)| checker.scenario(v, i, base_dir))
        .collect();
    if checker.problems.is_empty() {
        Ok(scenarios)
    } else {
        Err(BenchError::Invalid(checker.problems))
    }
}

pub fn load_scenario_file(path: impl AsRef<FsPath>) -> Result<Vec<Scenario>, BenchError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_scenarios(&text, path.parent().unwrap_or(FsPath::new(".")))
}

/// One planner run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsRecord {
    pub scenario: String,
    pub planner: String,
    pub run: usize,
    pub seed: u64,
    /// `None` when no path was found.
    pub path_cost: Option<f64>,
    pub wall_time_s: f64,
    pub accounted_memory: u64,
    pub expanded_or_sampled: u64,
    #[serde(skip)]
    pub path: Option<Path>,
}

/// Maps of a scenario, loaded once before any run.
#[derive(Debug, Clone)]
pub struct LoadedMaps {
    pub grid: WeightedGrid,
    pub elevation: Option<ElevationField>,
}

pub fn load_maps(s: &Scenario) -> Result<LoadedMaps, BenchError> {
    let raster_err = |source| BenchError::Raster {
        scenario: s.name.clone(),
        source,
    };
    let grid_err = |source| BenchError::Grid {
        scenario: s.name.clone(),
        source,
    };
    let raster = load_grayscale_raster(&s.weight_map).map_err(raster_err)?;
    let grid = WeightedGrid::from_raster(&raster, s.weights).map_err(grid_err)?;
    let elevation = match &s.elevation_map {
        Some(p) => {
            let r = load_grayscale_raster(p).map_err(raster_err)?;
            Some(ElevationField::from_raster(&r, s.elevation).map_err(grid_err)?)
        }
        None => None,
    };
    Ok(LoadedMaps { grid, elevation })
}

/// Run every planner `repeats` times on already loaded maps.
///
/// Run `i` uses seed `base_seed + i`. Only the planning call is timed.
pub fn run_scenario_on(s: &Scenario, maps: &LoadedMaps) -> Result<Vec<MetricsRecord>, BenchError> {
    let mut records = Vec::with_capacity(s.planners.len() * s.repeats);
    for entry in &s.planners {
        for run in 0..s.repeats {
            let seed = s.base_seed + run as u64;
            let t0 = Instant::now();
            let outcome = run_planner(&entry.spec, &maps.grid, maps.elevation.as_ref(), s.start, s.goal, seed);
            let wall_time_s = t0.elapsed().as_secs_f64();
            let outcome = outcome.map_err(|source| BenchError::Plan {
                scenario: s.name.clone(),
                planner: entry.label.clone(),
                source,
            })?;
            records.push(MetricsRecord {
                scenario: s.name.clone(),
                planner: entry.label.clone(),
                run,
                seed,
                path_cost: outcome.cost(),
                wall_time_s,
                accounted_memory: outcome.stats.peak_memory,
                expanded_or_sampled: outcome.stats.expanded,
                path: outcome.path,
            });
        }
    }
    Ok(records)
}

/// Load the scenario's maps, then run it.
pub fn run_scenario(s: &Scenario) -> Result<Vec<MetricsRecord>, BenchError> {
    let maps = load_maps(s)?;
    run_scenario_on(s, &maps)
}

/// Per-run records as CSV, in the order given.
pub fn records_to_csv(records: &[MetricsRecord]) -> Result<String, BenchError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Mean, population standard deviation, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Summary> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        // keep mean inside [min, max] despite rounding
        Some(Summary {
            mean: mean.clamp(min, max),
            std: var.sqrt(),
            min,
            max,
        })
    }
}

/// Statistics for one (scenario, planner) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupStats {
    pub scenario: String,
    pub planner: String,
    pub runs: usize,
    pub failures: usize,
    /// Over successful runs only; `None` if every run failed.
    pub path_cost: Option<Summary>,
    pub wall_time_s: Summary,
    pub memory_bytes: Summary,
    pub expanded: Summary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    /// In order of first appearance in the records.
    pub groups: Vec<GroupStats>,
}

impl RunStats {
    pub fn get(&self, scenario: &str, planner: &str) -> Option<&GroupStats> {
        self.groups
            .iter()
            .find(|g| g.scenario == scenario && g.planner == planner)
    }
}

pub fn aggregate_runs(records: &[MetricsRecord]) -> Result<RunStats, BenchError> {
    if records.is_empty() {
        return Err(BenchError::Empty("cannot aggregate an empty record list"));
    }
    let mut order: Vec<(String, String)> = Vec::new();
    let mut by_key: BTreeMap<(String, String), Vec<&MetricsRecord>> = BTreeMap::new();
    for r in records {
        let key = (r.scenario.clone(), r.planner.clone());
        let list = by_key.entry(key.clone()).or_default();
        if list.is_empty() {
            order.push(key);
        }
        list.push(r);
    }
    let groups = order
        .into_iter()
        .map(|key| {
            let rs = &by_key[&key];
            let costs: Vec<f64> = rs.iter().filter_map(|r| r.path_cost).collect();
            let col = |f: fn(&MetricsRecord) -> f64| {
                Summary::of(&rs.iter().map(|r| f(r)).collect::<Vec<_>>()).expect("group is non-empty")
            };
            GroupStats {
                runs: rs.len(),
                failures: rs.len() - costs.len(),
                path_cost: Summary::of(&costs),
                wall_time_s: col(|r| r.wall_time_s),
                memory_bytes: col(|r| r.accounted_memory as f64),
                expanded: col(|r| r.expanded_or_sampled as f64),
                scenario: key.0,
                planner: key.1,
            }
        })
        .collect();
    Ok(RunStats { groups })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
    Text,
}

impl TableFormat {
    pub fn extension(self) -> &'static str {
        match self {
            TableFormat::Csv => "csv",
            TableFormat::Json => "json",
            TableFormat::Text => "txt",
        }
    }
}

impl std::str::FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            "text" | "txt" => Ok(TableFormat::Text),
            _ => Err(format!("unknown format {s:?}, expected csv, json or text")),
        }
    }
}

const BYTES_PER_MB: f64 = 1024.0 * 1024.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    PathCost,
    ComputationTime,
    MemoryUsage,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::PathCost, Metric::ComputationTime, Metric::MemoryUsage];

    pub fn title(self) -> &'static str {
        match self {
            Metric::PathCost => "Path Cost",
            Metric::ComputationTime => "Computation Time (s)",
            Metric::MemoryUsage => "Memory Usage (MB)",
        }
    }

    pub fn id(self) -> &'static str {
        match self {
            Metric::PathCost => "path_cost",
            Metric::ComputationTime => "computation_time_s",
            Metric::MemoryUsage => "memory_usage_mb",
        }
    }

    fn summary(self, g: &GroupStats) -> Option<Summary> {
        match self {
            Metric::PathCost => g.path_cost,
            Metric::ComputationTime => Some(g.wall_time_s),
            Metric::MemoryUsage => {
                let m = g.memory_bytes;
                Some(Summary {
                    mean: m.mean / BYTES_PER_MB,
                    std: m.std / BYTES_PER_MB,
                    min: m.min / BYTES_PER_MB,
                    max: m.max / BYTES_PER_MB,
                })
            }
        }
    }

    fn format(self, v: f64) -> String {
        match self {
            Metric::PathCost => format!("{v:.1}"),
            Metric::ComputationTime => format!("{v:.4}"),
            Metric::MemoryUsage => format!("{v:.4}"),
        }
    }
}

/// One row of the CSV/JSON table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub scenario: String,
    pub planner: String,
    pub metric: String,
    pub mean: Option<f64>,
    pub std: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub failures: usize,
}

pub fn table_rows(stats: &RunStats) -> Vec<TableRow> {
    let mut rows = Vec::new();
    for g in &stats.groups {
        for m in Metric::ALL {
            let s = m.summary(g);
            rows.push(TableRow {
                scenario: g.scenario.clone(),
                planner: g.planner.clone(),
                metric: m.id().to_string(),
                mean: s.map(|s| s.mean),
                std: s.map(|s| s.std),
                min: s.map(|s| s.min),
                max: s.map(|s| s.max),
                failures: g.failures,
            });
        }
    }
    rows
}

fn render_text(stats: &RunStats) -> String {
    let mut scenarios: Vec<&str> = Vec::new();
    let mut planners: Vec<&str> = Vec::new();
    for g in &stats.groups {
        if !scenarios.contains(&g.scenario.as_str()) {
            scenarios.push(&g.scenario);
        }
        if !planners.contains(&g.planner.as_str()) {
            planners.push(&g.planner);
        }
    }
    let mut table: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["Metric".to_string(), "Algorithm".to_string()];
    header.extend(scenarios.iter().map(|s| s.to_string()));
    table.push(header);
    for m in Metric::ALL {
        for p in &planners {
            let mut row = vec![m.title().to_string(), p.to_string()];
            for s in &scenarios {
                let cell = match stats.get(s, p) {
                    None => "-".to_string(),
                    Some(g) => {
                        let mut text = m.summary(g).map_or("-".to_string(), |s| m.format(s.mean));
                        if m == Metric::PathCost && g.failures > 0 {
                            let _ = write!(text, " ({}/{} failed)", g.failures, g.runs);
                        }
                        text
                    }
                };
                row.push(cell);
            }
            table.push(row);
        }
    }
    let cols = table[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| table.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for (i, row) in table.iter().enumerate() {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(cells.join(" | ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&rule.join("-+-"));
            out.push('\n');
        }
    }
    out
}

/// Render aggregate statistics in the requested format.
pub fn emit_table(stats: &RunStats, format: TableFormat) -> Result<String, BenchError> {
    if stats.groups.is_empty() {
        return Err(BenchError::Empty("no planner statistics to report"));
    }
    Ok(match format {
        TableFormat::Text => render_text(stats),
        TableFormat::Json => serde_json::to_string_pretty(&table_rows(stats))? + "\n",
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in table_rows(stats) {
                w.serialize(row)?;
            }
            let bytes = w.into_inner().map_err(|e| BenchError::Csv(e.into_error().into()))?;
            String::from_utf8(bytes).expect("csv output is utf-8")
        }
    })
}

/// Render and write the table to `path`.
pub fn write_table(stats: &RunStats, format: TableFormat, path: impl AsRef<FsPath>) -> Result<(), BenchError> {
    let path = path.as_ref();
    let text = emit_table(stats, format)?;
    fs::write(path, text).map_err(io_err(path))
}
