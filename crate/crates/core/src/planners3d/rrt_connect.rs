//! Bidirectional RRT with a greedy connect step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid_model::{segment_cost, CellCoord, CostModel, Path, Segment, WeightedGrid};
use crate::planners2d::tree::{densify, Tree};
use crate::planners2d::{rrt_steer, sample_passable, RrtParams, TREE_NODE_BYTES};
use crate::planning::{check_endpoints, MemoryMeter, PlanError, PlanOutcome, PlanStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendStatus {
    Advanced,
    Reached,
    Trapped,
}

/// One of the two trees of a bidirectional search.
#[derive(Debug)]
pub struct ConnectTree {
    tree: Tree,
}

impl ConnectTree {
    pub fn new(grid: &WeightedGrid, root: CellCoord, delta: f64, meter: &mut MemoryMeter) -> Self {
        ConnectTree {
            tree: Tree::new(grid, root, (4.0 * delta).ceil() as usize, meter),
        }
    }

    pub fn len(&self) -> usize {
        self.tree.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn root(&self) -> CellCoord {
        self.tree.cell(0)
    }

    pub fn contains(&self, c: CellCoord) -> bool {
        self.tree.find(c).is_some()
    }

    /// Node cells from the root to the node at `c`, if present.
    pub fn branch_to(&self, c: CellCoord) -> Option<Vec<CellCoord>> {
        self.tree.find(c).map(|id| self.tree.branch(id))
    }

    /// Single step from the nearest node toward `target`.
    fn step<M: CostModel + ?Sized>(
        &mut self,
        model: &M,
        from: u32,
        target: CellCoord,
        delta: f64,
        meter: &mut MemoryMeter,
    ) -> Option<u32> {
        let here = self.tree.cell(from);
        let next = rrt_steer(here, target, delta);
        if next == here {
            return None;
        }
        let Segment::Free { cost, .. } = segment_cost(model, here, next) else {
            return None;
        };
        Some(match self.tree.find(next) {
            Some(id) => id,
            None => self.tree.insert(next, from, self.tree.cost(from) + cost, meter),
        })
    }
}

/// Repeatedly steer from the nearest node toward `target`.
///
/// `Trapped` means the first step was blocked and nothing was inserted.
pub fn rrt_connect_extend<M: CostModel + ?Sized>(
    model: &M,
    tree: &mut ConnectTree,
    target: CellCoord,
    delta: f64,
    meter: &mut MemoryMeter,
) -> ExtendStatus {
    let mut cur = tree.tree.nearest(target);
    if tree.tree.cell(cur) == target {
        return ExtendStatus::Reached;
    }
    let mut moved = false;
    while let Some(next) = tree.step(model, cur, target, delta, meter) {
        moved = true;
        if tree.tree.cell(next) == target {
            return ExtendStatus::Reached;
        }
        cur = next;
    }
    if moved {
        ExtendStatus::Advanced
    } else {
        ExtendStatus::Trapped
    }
}

/// Accounted bytes of an RRT-Connect run whose start equals its goal.
pub const RRTCONNECT_START_BYTES: u64 = TREE_NODE_BYTES;

pub fn plan_rrtconnect<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
    p: &RrtParams,
) -> Result<PlanOutcome, PlanError> {
    let grid = model.grid();
    check_endpoints(grid, start, goal)?;
    p.validate()?;

    let mut meter = MemoryMeter::new();
    let mut a = ConnectTree::new(grid, start, p.step_delta, &mut meter);
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
    let mut b = ConnectTree::new(grid, goal, p.step_delta, &mut meter);
    let mut a_is_start = true;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut used = 0;
    let mut meeting = None;
    for it in 1..=p.max_iterations {
        used = it;
        let sample = if rng.gen::<f64>() < p.goal_bias {
            b.root()
        } else {
            sample_passable(grid, &mut rng)
        };
        let nearest = a.tree.nearest(sample);
        let before = a.len();
        if let Some(new_id) = a.step(model, nearest, sample, p.step_delta, &mut meter) {
            if a.len() > before {
                let q_new = a.tree.cell(new_id);
                if rrt_connect_extend(model, &mut b, q_new, p.step_delta, &mut meter) == ExtendStatus::Reached {
                    meeting = Some(q_new);
                    break;
                }
            }
        }
        std::mem::swap(&mut a, &mut b);
        a_is_start = !a_is_start;
    }

    let path = match meeting {
        Some(q) => {
            let (from_start, from_goal) = if a_is_start { (&a, &b) } else { (&b, &a) };
            let mut cells = densify(&from_start.branch_to(q).expect("meeting cell in start tree"));
            // rasterize the goal branch in the direction it was checked
            let mut tail = densify(&from_goal.branch_to(q).expect("meeting cell in goal tree"));
            tail.reverse();
            cells.extend(tail.into_iter().skip(1));
            Some(Path::from_cells(model, cells)?)
        }
        None => None,
    };
    Ok(PlanOutcome {
        stats: PlanStats {
            expanded: used,
            iterations: used,
            peak_memory: meter.peak(),
            best_cost_trace: path.iter().map(|p| (used, p.total_cost)).collect(),
        },
        path,
    })
}
