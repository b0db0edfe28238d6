//! Types shared by every planner: outcomes, run statistics, errors and
//! logical memory accounting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid_model::{CellCoord, GridError, Path, WeightedGrid};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("{role} {cell} is outside the {width}x{height} grid")]
    OutOfBounds {
        role: &'static str,
        cell: CellCoord,
        width: usize,
        height: usize,
    },
    #[error("{role} {cell} is impassable")]
    Impassable { role: &'static str, cell: CellCoord },
    #[error("invalid planner parameter: {0}")]
    Params(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

pub(crate) fn check_endpoints(
    grid: &WeightedGrid,
    start: CellCoord,
    goal: CellCoord,
) -> Result<(), PlanError> {
    for (role, cell) in [("start", start), ("goal", goal)] {
        if !grid.in_bounds(cell) {
            return Err(PlanError::OutOfBounds {
                role,
                cell,
                width: grid.width(),
                height: grid.height(),
            });
        }
        if !grid.is_passable(cell) {
            return Err(PlanError::Impassable { role, cell });
        }
    }
    Ok(())
}

/// Counters captured during one planner run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanStats {
    /// Nodes expanded (graph search), samples drawn (RRT family) or ant
    /// moves taken (NIACO).
    pub expanded: u64,
    /// Outer iterations executed (0 for graph search).
    pub iterations: u64,
    /// Peak accounted bytes of planner-owned structures.
    pub peak_memory: u64,
    /// `(iteration, best cost)` each time the best solution improved.
    pub best_cost_trace: Vec<(u64, f64)>,
}

/// A planner's answer: a path if one was found, plus run statistics either way.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub path: Option<Path>,
    pub stats: PlanStats,
}

impl PlanOutcome {
    pub fn cost(&self) -> Option<f64> {
        self.path.as_ref().map(|p| p.total_cost)
    }
}

/// Running total and peak of accounted bytes.
#[derive(Debug, Clone, Copy, Default)]
pub struct MemoryMeter {
    current: u64,
    peak: u64,
}

impl MemoryMeter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, bytes: u64) {
        self.current += bytes;
        self.peak = self.peak.max(self.current);
    }

    pub fn free(&mut self, bytes: u64) {
        self.current = self.current.saturating_sub(bytes);
    }

    pub fn current(&self) -> u64 {
        self.current
    }

    pub fn peak(&self) -> u64 {
        self.peak
    }
}

/// Scale applied to the straight-line heuristic of A*.
///
/// `Auto` uses the grid's minimum passable weight, which keeps the heuristic
/// admissible and consistent. Serialized as the string `"auto"` or a number.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum HeuristicScale {
    #[default]
    Auto,
    Fixed(f64),
}

impl Serialize for HeuristicScale {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            HeuristicScale::Auto => s.serialize_str("auto"),
            HeuristicScale::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for HeuristicScale {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Number(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Number(v) => Ok(HeuristicScale::Fixed(v)),
            Raw::Text(t) if t == "auto" => Ok(HeuristicScale::Auto),
            Raw::Text(t) => Err(serde::de::Error::custom(format!(
                "expected \"auto\" or a number, got {t:?}"
            ))),
        }
    }
}

impl HeuristicScale {
    pub fn resolve(self, grid: &WeightedGrid) -> Result<f64, PlanError> {
        match self {
            HeuristicScale::Auto => Ok(grid.min_passable_weight().unwrap_or(0.0)),
            HeuristicScale::Fixed(s) if s >= 0.0 && s.is_finite() => Ok(s),
            HeuristicScale::Fixed(s) => Err(PlanError::Params(format!(
                "heuristic_scale must be >= 0, got {s}"
            ))),
        }
    }
}
