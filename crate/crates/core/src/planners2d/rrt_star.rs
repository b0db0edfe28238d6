//! RRT* on the weighted lattice.
//!
//! Segments are rasterized with Bresenham and charged the weighted edge
//! costs of their cells, so the tree optimizes the same metric as the graph
//! planners. Samples, nodes and steering all live on integer cells.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::tree::{densify, Tree, TREE_NODE_BYTES};
use crate::grid_model::{segment_cost, CellCoord, CostModel, Path, Segment, WeightedGrid};
use crate::planning::{check_endpoints, MemoryMeter, PlanError, PlanOutcome, PlanStats};

/// Parameters shared by RRT* and RRT-Connect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RrtParams {
    pub max_iterations: u64,
    /// Maximum extension per step, in pixels.
    pub step_delta: f64,
    /// Shrinking-ball radius scale; `None` derives it from the passable area.
    pub neighborhood_gamma: Option<f64>,
    pub goal_bias: f64,
    /// Nodes within this many pixels of the goal try to link to it directly.
    pub goal_tolerance: f64,
    pub seed: u64,
}

impl Default for RrtParams {
    fn default() -> Self {
        RrtParams {
            max_iterations: 5000,
            step_delta: 3.0,
            neighborhood_gamma: None,
            goal_bias: 0.05,
            goal_tolerance: 3.0,
            seed: 0,
        }
    }
}

impl RrtParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        if !(self.step_delta >= 1.0 && self.step_delta.is_finite()) {
            return Err(PlanError::Params(format!(
                "step_delta must be >= 1, got {}",
                self.step_delta
            )));
        }
        if !(0.0..=1.0).contains(&self.goal_bias) {
            return Err(PlanError::Params(format!(
                "goal_bias must be in [0, 1], got {}",
                self.goal_bias
            )));
        }
        if !(self.goal_tolerance >= 0.0 && self.goal_tolerance.is_finite()) {
            return Err(PlanError::Params(format!(
                "goal_tolerance must be >= 0, got {}",
                self.goal_tolerance
            )));
        }
        if let Some(g) = self.neighborhood_gamma {
            if !(g >= 0.0 && g.is_finite()) {
                return Err(PlanError::Params(format!(
                    "neighborhood_gamma must be >= 0, got {g}"
                )));
            }
        }
        Ok(())
    }
}

/// Lower bound on the shrinking-ball constant for a 2D space whose free
/// volume is the passable pixel area.
pub fn default_gamma(grid: &WeightedGrid) -> f64 {
    let area = grid.passable_count() as f64;
    2.0 * (1.5f64).sqrt() * (area / PI).sqrt()
}

/// Move from `from` toward `to` by at most `delta` pixels, rounding the
/// intermediate point half-up to the nearest cell.
pub fn rrt_steer(from: CellCoord, to: CellCoord, delta: f64) -> CellCoord {
    let d = from.distance(to);
    if d <= delta {
        return to;
    }
    let t = delta / d;
    let x = from.x as f64 + t * (to.x as f64 - from.x as f64);
    let y = from.y as f64 + t * (to.y as f64 - from.y as f64);
    CellCoord::new((x + 0.5).floor() as usize, (y + 0.5).floor() as usize)
}

/// A possible parent for a new node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParentCandidate {
    pub cell: CellCoord,
    pub cost_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParentChoice {
    /// Position in the candidate list.
    pub index: usize,
    /// Cost of reaching the new node through this parent.
    pub cost: f64,
}

/// Pick the candidate minimizing `cost_so_far + segment_cost(candidate, x_new)`.
///
/// Candidates are expected in tree insertion order; ties go to the earlier
/// one. Returns `None` when every segment is blocked.
pub fn rrt_choose_parent<M: CostModel + ?Sized>(
    model: &M,
    candidates: &[ParentCandidate],
    x_new: CellCoord,
) -> Option<ParentChoice> {
    let mut best: Option<ParentChoice> = None;
    for (index, cand) in candidates.iter().enumerate() {
        if let Segment::Free { cost, .. } = segment_cost(model, cand.cell, x_new) {
            let total = cand.cost_so_far + cost;
            if best.as_ref().is_none_or(|b| total < b.cost) {
                best = Some(ParentChoice { index, cost: total });
            }
        }
    }
    best
}

/// Uniform sample over passable cells, by rejection.
pub(crate) fn sample_passable(grid: &WeightedGrid, rng: &mut ChaCha8Rng) -> CellCoord {
    loop {
        let c = CellCoord::new(rng.gen_range(0..grid.width()), rng.gen_range(0..grid.height()));
        if grid.is_passable(c) {
            return c;
        }
    }
}

/// Bytes per recorded goal link (node id + link cost).
pub const GOAL_LINK_BYTES: u64 = (std::mem::size_of::<u32>() + std::mem::size_of::<f64>()) as u64;

pub fn plan_rrtstar<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
    p: &RrtParams,
) -> Result<PlanOutcome, PlanError> {
    let grid = model.grid();
    check_endpoints(grid, start, goal)?;
    p.validate()?;

    let mut meter = MemoryMeter::new();
    let cap = 4.0 * p.step_delta;
    let mut tree = Tree::new(grid, start, cap.ceil() as usize, &mut meter);
    if start == goal {
        return Ok(PlanOutcome {
            path: Some(Path::trivial(start)),
            stats: PlanStats {
                peak_memory: meter.peak(),
                best_cost_trace: vec![(0, 0.0)],
                ..PlanStats::default()
            },
        });
    }

    let gamma = p.neighborhood_gamma.unwrap_or_else(|| default_gamma(grid));
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut goal_links: Vec<(u32, f64)> = Vec::new();
    let mut best: Option<(usize, f64)> = None;
    let mut trace = Vec::new();
    let mut candidates = Vec::new();

    for it in 1..=p.max_iterations {
        let sample = if rng.gen::<f64>() < p.goal_bias {
            goal
        } else {
            sample_passable(grid, &mut rng)
        };
        let nearest = tree.nearest(sample);
        let x_new = rrt_steer(tree.cell(nearest), sample, p.step_delta);

        if x_new != tree.cell(nearest) && tree.find(x_new).is_none() && grid.is_passable(x_new) {
            let n = (tree.len() + 1) as f64;
            let radius = (gamma * (n.ln() / n).sqrt()).min(cap);
            let mut near = tree.within(x_new, radius);
            if let Err(pos) = near.binary_search(&nearest) {
                near.insert(pos, nearest);
            }
            candidates.clear();
            candidates.extend(near.iter().map(|&id| ParentCandidate {
                cell: tree.cell(id),
                cost_so_far: tree.cost(id),
            }));
            if let Some(choice) = rrt_choose_parent(model, &candidates, x_new) {
                let parent = near[choice.index];
                let new_id = tree.insert(x_new, parent, choice.cost, &mut meter);
                for &id in &near {
                    if id == parent {
                        continue;
                    }
                    if let Segment::Free { cost, .. } = segment_cost(model, x_new, tree.cell(id)) {
                        let through = tree.cost(new_id) + cost;
                        if through < tree.cost(id) {
                            tree.reparent(id, new_id, through);
                        }
                    }
                }
                if x_new.distance(goal) <= p.goal_tolerance {
                    let link = if x_new == goal {
                        Some(0.0)
                    } else {
                        segment_cost(model, x_new, goal).cost()
                    };
                    if let Some(cost) = link {
                        goal_links.push((new_id, cost));
                        meter.alloc(GOAL_LINK_BYTES);
                    }
                }
            }
        }

        for (i, &(id, link)) in goal_links.iter().enumerate() {
            let total = tree.cost(id) + link;
            if best.is_none_or(|(_, b)| total < b) {
                best = Some((i, total));
            }
        }
        if let Some((_, b)) = best {
            if trace.last().is_none_or(|&(_, prev)| b < prev) {
                trace.push((it, b));
            }
        }
    }

    let path = match best {
        Some((i, _)) => {
            let (id, _) = goal_links[i];
            let mut waypoints = tree.branch(id);
            if *waypoints.last().expect("non-empty branch") != goal {
                waypoints.push(goal);
            }
            Some(Path::from_cells(model, densify(&waypoints))?)
        }
        None => None,
    };
    Ok(PlanOutcome {
        path,
        stats: PlanStats {
            expanded: p.max_iterations,
            iterations: p.max_iterations,
            peak_memory: meter.peak(),
            best_cost_trace: trace,
        },
    })
}

/// Accounted bytes of an RRT* run whose start equals its goal.
pub const RRTSTAR_START_BYTES: u64 = TREE_NODE_BYTES;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::PlanarCost;
    use crate::planners2d::plan_dijkstra_2d;

    fn c(x: usize, y: usize) -> CellCoord {
        CellCoord::new(x, y)
    }

    #[test]
    fn steer_examples() {
        assert_eq!(rrt_steer(c(0, 0), c(10, 0), 3.0), c(3, 0));
        assert_eq!(rrt_steer(c(0, 0), c(1, 1), 3.0), c(1, 1));
        assert_eq!(rrt_steer(c(0, 0), c(10, 10), 3.0), c(2, 2));
        assert_eq!(rrt_steer(c(4, 4), c(4, 4), 3.0), c(4, 4));
        // 1.5 rounds up
        assert_eq!(rrt_steer(c(0, 0), c(0, 2), 1.5), c(0, 2));
        assert_eq!(rrt_steer(c(0, 0), c(0, 4), 1.5), c(0, 2));
    }

    #[test]
    fn choose_parent_examples() {
        // a 1-row strip with weight 1: segment cost equals pixel distance
        let grid = WeightedGrid::uniform(12, 1, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        let x_new = c(6, 0);
        let cands = [
            ParentCandidate { cell: c(4, 0), cost_so_far: 5.0 },
            ParentCandidate { cell: c(10, 0), cost_so_far: 4.0 },
        ];
        assert_eq!(rrt_choose_parent(&model, &cands, x_new), Some(ParentChoice { index: 0, cost: 7.0 }));
        assert_eq!(
            rrt_choose_parent(&model, &cands[1..], x_new),
            Some(ParentChoice { index: 0, cost: 8.0 })
        );
        // equal totals: the earlier candidate wins
        let tied = [
            ParentCandidate { cell: c(4, 0), cost_so_far: 6.0 },
            ParentCandidate { cell: c(8, 0), cost_so_far: 6.0 },
        ];
        assert_eq!(rrt_choose_parent(&model, &tied, x_new).unwrap().index, 0);
    }

    #[test]
    fn choose_parent_blocked() {
        let grid = WeightedGrid::new(3, 1, vec![Some(1.0), None, Some(1.0)]).unwrap();
        let model = PlanarCost::new(&grid);
        let cands = [ParentCandidate { cell: c(0, 0), cost_so_far: 0.0 }];
        assert_eq!(rrt_choose_parent(&model, &cands, c(2, 0)), None);
    }

    #[test]
    fn choose_parent_matches_brute_force() {
        let grid = WeightedGrid::new(9, 9, (0..81).map(|i| Some((i * 7 % 9 + 1) as f64)).collect()).unwrap();
        let model = PlanarCost::new(&grid);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let x_new = c(rng.gen_range(0..9), rng.gen_range(0..9));
            let n = rng.gen_range(1..8);
            let cands: Vec<_> = (0..n)
                .map(|_| ParentCandidate {
                    cell: c(rng.gen_range(0..9), rng.gen_range(0..9)),
                    cost_so_far: rng.gen_range(0..20) as f64,
                })
                .collect();
            let totals: Vec<f64> = cands
                .iter()
                .map(|k| k.cost_so_far + segment_cost(&model, k.cell, x_new).cost().unwrap())
                .collect();
            let best = totals.iter().copied().fold(f64::INFINITY, f64::min);
            let first = totals.iter().position(|&t| t == best).unwrap();
            assert_eq!(
                rrt_choose_parent(&model, &cands, x_new),
                Some(ParentChoice { index: first, cost: best })
            );
        }
    }

    #[test]
    fn trivial_run() {
        let grid = WeightedGrid::uniform(5, 5, 1.0).unwrap();
        let out = plan_rrtstar(&PlanarCost::new(&grid), c(2, 2), c(2, 2), &RrtParams::default()).unwrap();
        assert_eq!(out.cost(), Some(0.0));
        assert_eq!(out.stats.iterations, 0);
        assert_eq!(out.stats.peak_memory, RRTSTAR_START_BYTES);
    }

    #[test]
    fn rejects_bad_params() {
        let grid = WeightedGrid::uniform(5, 5, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        for p in [
            RrtParams { step_delta: 0.5, ..RrtParams::default() },
            RrtParams { goal_bias: 1.5, ..RrtParams::default() },
        ] {
            assert!(matches!(plan_rrtstar(&model, c(0, 0), c(4, 4), &p), Err(PlanError::Params(_))));
        }
    }

    #[test]
    fn deterministic_and_monotone() {
        let cells = (0..900).map(|i| (i % 30 != 15 || i / 30 > 24).then_some((i % 4 + 1) as f64)).collect();
        let grid = WeightedGrid::new(30, 30, cells).unwrap();
        let model = PlanarCost::new(&grid);
        let p = RrtParams {
            max_iterations: 1500,
            seed: 9,
            ..RrtParams::default()
        };
        let a = plan_rrtstar(&model, c(2, 2), c(28, 3), &p).unwrap();
        let b = plan_rrtstar(&model, c(2, 2), c(28, 3), &p).unwrap();
        assert_eq!(a, b);
        let path = a.path.expect("path through the gap");
        path.validate(&model).unwrap();
        let trace = &a.stats.best_cost_trace;
        assert!(trace.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].0 > w[0].0));
        assert!(crate::grid_model::costs_match(trace.last().unwrap().1, path.total_cost));
        let opt = plan_dijkstra_2d(&grid, c(2, 2), c(28, 3)).unwrap().cost().unwrap();
        assert!(path.total_cost >= opt - 1e-9 * opt);
    }

    #[test]
    fn walled_goal_gives_no_path() {
        let cells = (0..100).map(|i| (i % 10 != 5).then_some(1.0)).collect();
        let grid = WeightedGrid::new(10, 10, cells).unwrap();
        let p = RrtParams {
            max_iterations: 300,
            ..RrtParams::default()
        };
        let out = plan_rrtstar(&PlanarCost::new(&grid), c(1, 1), c(8, 8), &p).unwrap();
        assert!(out.path.is_none());
        assert_eq!(out.stats.iterations, 300);
    }

    #[test]
    fn open_grid_near_optimal() {
        let grid = WeightedGrid::uniform(20, 20, 1.0).unwrap();
        let (start, goal) = (c(0, 0), c(19, 19));
        let opt = plan_dijkstra_2d(&grid, start, goal).unwrap().cost().unwrap();
        let good = (0..20)
            .filter(|&seed| {
                let p = RrtParams { seed, ..RrtParams::default() };
                plan_rrtstar_cost(&grid, start, goal, &p).is_some_and(|c| c <= 1.1 * opt)
            })
            .count();
        assert!(good >= 18, "{good}/20 within 10%");
    }

    fn plan_rrtstar_cost(grid: &WeightedGrid, s: CellCoord, g: CellCoord, p: &RrtParams) -> Option<f64> {
        plan_rrtstar(&PlanarCost::new(grid), s, g, p).unwrap().cost()
    }
}
