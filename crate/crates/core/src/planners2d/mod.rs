//! Planners over the planar metric: Dijkstra, A*, RRT* and NIACO.
//!
//! Each planner is also exposed generically over [`CostModel`] so the
//! terrain variants in [`crate::planners3d`] share the exact same code.

mod niaco;
mod rrt_star;
mod search;
pub(crate) mod tree;

pub use niaco::{
    niaco_attractiveness, niaco_probabilities, niaco_transition, niaco_update_pheromone, plan_niaco,
    NiacoParams, PheromoneTable, NIACO_START_BYTES, PATH_CELL_BYTES, PHEROMONE_ENTRY_BYTES,
    TABU_ENTRY_BYTES,
};
pub use rrt_star::{
    default_gamma, plan_rrtstar, rrt_choose_parent, rrt_steer, ParentCandidate, ParentChoice, RrtParams,
    GOAL_LINK_BYTES, RRTSTAR_START_BYTES,
};
pub(crate) use rrt_star::sample_passable;
pub use search::{LABEL_BYTES, OPEN_ENTRY_BYTES, SEARCH_START_BYTES};
pub use tree::TREE_NODE_BYTES;

use crate::grid_model::{CellCoord, CostModel, PlanarCost, WeightedGrid};
use crate::planning::{HeuristicScale, PlanError, PlanOutcome};

pub fn plan_dijkstra<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
) -> Result<PlanOutcome, PlanError> {
    search::best_first(model, start, goal, |_| 0.0)
}

/// A* with `h(n) = straight_distance(n, goal) × scale`.
pub fn plan_astar<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
    scale: HeuristicScale,
) -> Result<PlanOutcome, PlanError> {
    let s = scale.resolve(model.grid())?;
    search::best_first(model, start, goal, |n| model.straight_distance(n, goal) * s)
}

pub fn plan_dijkstra_2d(grid: &WeightedGrid, start: CellCoord, goal: CellCoord) -> Result<PlanOutcome, PlanError> {
    plan_dijkstra(&PlanarCost::new(grid), start, goal)
}

pub fn plan_astar_2d(
    grid: &WeightedGrid,
    start: CellCoord,
    goal: CellCoord,
    scale: HeuristicScale,
) -> Result<PlanOutcome, PlanError> {
    plan_astar(&PlanarCost::new(grid), start, goal, scale)
}

pub fn plan_rrtstar_2d(
    grid: &WeightedGrid,
    start: CellCoord,
    goal: CellCoord,
    p: &RrtParams,
) -> Result<PlanOutcome, PlanError> {
    plan_rrtstar(&PlanarCost::new(grid), start, goal, p)
}

pub fn plan_niaco_2d(
    grid: &WeightedGrid,
    start: CellCoord,
    goal: CellCoord,
    p: &NiacoParams,
) -> Result<PlanOutcome, PlanError> {
    plan_niaco(&PlanarCost::new(grid), start, goal, p)
}

/// Euclidean heuristic of A* for `scale`.
pub fn astar_heuristic(n: CellCoord, goal: CellCoord, scale: f64) -> f64 {
    n.distance(goal) * scale
}
