//! Planner selection by name and JSON parameters, for the bench harness and
//! the command line.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::grid_model::{CellCoord, Cost3DParams, CostModel, ElevationField, GridError, PlanarCost, TerrainCost, WeightedGrid};
use crate::planners2d::{plan_astar, plan_dijkstra, plan_niaco, plan_rrtstar, NiacoParams, RrtParams};
use crate::planners3d::plan_rrtconnect;
use crate::planning::{HeuristicScale, PlanError, PlanOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlannerKind {
    Dijkstra,
    Astar,
    Rrtstar,
    Niaco,
    Dijkstra3d,
    Astar3d,
    Rrtconnect,
    Niaco3d,
}

impl PlannerKind {
    pub const ALL: [PlannerKind; 8] = [
        PlannerKind::Dijkstra,
        PlannerKind::Astar,
        PlannerKind::Rrtstar,
        PlannerKind::Niaco,
        PlannerKind::Dijkstra3d,
        PlannerKind::Astar3d,
        PlannerKind::Rrtconnect,
        PlannerKind::Niaco3d,
    ];

    pub fn id(self) -> &'static str {
        match self {
            PlannerKind::Dijkstra => "dijkstra",
            PlannerKind::Astar => "astar",
            PlannerKind::Rrtstar => "rrtstar",
            PlannerKind::Niaco => "niaco",
            PlannerKind::Dijkstra3d => "dijkstra3d",
            PlannerKind::Astar3d => "astar3d",
            PlannerKind::Rrtconnect => "rrtconnect",
            PlannerKind::Niaco3d => "niaco3d",
        }
    }

    /// Name used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            PlannerKind::Dijkstra => "Dijkstra",
            PlannerKind::Astar => "A*",
            PlannerKind::Rrtstar => "RRT*",
            PlannerKind::Niaco => "NIACO",
            PlannerKind::Dijkstra3d => "3D Dijkstra",
            PlannerKind::Astar3d => "3D A*",
            PlannerKind::Rrtconnect => "RRT-Connect",
            PlannerKind::Niaco3d => "3D NIACO",
        }
    }

    /// Whether the planner needs an elevation field.
    pub fn is_3d(self) -> bool {
        matches!(
            self,
            PlannerKind::Dijkstra3d | PlannerKind::Astar3d | PlannerKind::Rrtconnect | PlannerKind::Niaco3d
        )
    }

    /// Whether results depend on the seed.
    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            PlannerKind::Rrtstar | PlannerKind::Niaco | PlannerKind::Rrtconnect | PlannerKind::Niaco3d
        )
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for PlannerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PlannerKind::ALL
            .into_iter()
            .find(|k| k.id() == s)
            .ok_or_else(|| {
                let names: Vec<_> = PlannerKind::ALL.iter().map(|k| k.id()).collect();
                format!("unknown planner {s:?}, expected one of {}", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AstarParams {
    pub heuristic_scale: HeuristicScale,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoParams {}

/// Typed parameters for one planner kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlannerParams {
    Dijkstra,
    Astar(AstarParams),
    Rrt(RrtParams),
    Niaco(NiacoParams),
}

impl PlannerParams {
    pub fn default_for(kind: PlannerKind) -> Self {
        match kind {
            PlannerKind::Dijkstra | PlannerKind::Dijkstra3d => PlannerParams::Dijkstra,
            PlannerKind::Astar | PlannerKind::Astar3d => PlannerParams::Astar(AstarParams::default()),
            PlannerKind::Rrtstar | PlannerKind::Rrtconnect => PlannerParams::Rrt(RrtParams::default()),
            PlannerKind::Niaco | PlannerKind::Niaco3d => PlannerParams::Niaco(NiacoParams::default()),
        }
    }

    /// Parse `value` (a JSON object, or null for defaults) for `kind`.
    pub fn from_json(kind: PlannerKind, value: &Value) -> Result<Self, serde_json::Error> {
        if value.is_null() {
            return Ok(Self::default_for(kind));
        }
        let v = value.clone();
        Ok(match kind {
            PlannerKind::Dijkstra | PlannerKind::Dijkstra3d => {
                serde_json::from_value::<NoParams>(v)?;
                PlannerParams::Dijkstra
            }
            PlannerKind::Astar | PlannerKind::Astar3d => PlannerParams::Astar(serde_json::from_value(v)?),
            PlannerKind::Rrtstar | PlannerKind::Rrtconnect => PlannerParams::Rrt(serde_json::from_value(v)?),
            PlannerKind::Niaco | PlannerKind::Niaco3d => PlannerParams::Niaco(serde_json::from_value(v)?),
        })
    }

    /// The same parameters with the RNG seed replaced.
    pub fn with_seed(self, seed: u64) -> Self {
        match self {
            PlannerParams::Rrt(p) => PlannerParams::Rrt(RrtParams { seed, ..p }),
            PlannerParams::Niaco(p) => PlannerParams::Niaco(NiacoParams { seed, ..p }),
            other => other,
        }
    }
}

/// A planner kind with its parameters and, for 3D kinds, the terrain metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerSpec {
    pub kind: PlannerKind,
    pub params: PlannerParams,
    pub cost3d: Cost3DParams,
}

impl PlannerSpec {
    pub fn new(kind: PlannerKind) -> Self {
        PlannerSpec {
            kind,
            params: PlannerParams::default_for(kind),
            cost3d: Cost3DParams::default(),
        }
    }

    /// Check that the parameter variant fits the kind.
    fn check(&self) -> Result<(), PlanError> {
        let expected = std::mem::discriminant(&PlannerParams::default_for(self.kind));
        if std::mem::discriminant(&self.params) != expected {
            return Err(PlanError::Params(format!(
                "parameters do not belong to planner {}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Run one planner. 2D kinds ignore `elev`; 3D kinds require it.
pub fn run_planner(
    spec: &PlannerSpec,
    grid: &WeightedGrid,
    elev: Option<&ElevationField>,
    start: CellCoord,
    goal: CellCoord,
    seed: u64,
) -> Result<PlanOutcome, PlanError> {
    spec.check()?;
    let params = spec.params.with_seed(seed);
    if !spec.kind.is_3d() {
        let model = PlanarCost::new(grid);
        return dispatch(&model, spec.kind, params, start, goal);
    }
    let elev = elev.ok_or_else(|| PlanError::Params(format!("planner {} needs an elevation map", spec.kind)))?;
    if (grid.width(), grid.height()) != (elev.width(), elev.height()) {
        return Err(GridError::DimensionMismatch {
            weights: (grid.width(), grid.height()),
            elevation: (elev.width(), elev.height()),
        }
        .into());
    }
    spec.cost3d.validate()?;
    let model = TerrainCost::new(grid, elev, spec.cost3d);
    dispatch(&model, spec.kind, params, start, goal)
}

fn dispatch<M: CostModel>(
    model: &M,
    kind: PlannerKind,
    params: PlannerParams,
    start: CellCoord,
    goal: CellCoord,
) -> Result<PlanOutcome, PlanError> {
    match params {
        PlannerParams::Dijkstra => plan_dijkstra(model, start, goal),
        PlannerParams::Astar(a) => plan_astar(model, start, goal, a.heuristic_scale),
        PlannerParams::Rrt(p) if kind == PlannerKind::Rrtconnect => plan_rrtconnect(model, start, goal, &p),
        PlannerParams::Rrt(p) => plan_rrtstar(model, start, goal, &p),
        PlannerParams::Niaco(p) => plan_niaco(model, start, goal, &p),
    }
}
