//! Slow reference shortest-path solvers for tests.
//!
//! Neither solver shares data structures or visit order with the planners:
//! one is a Bellman–Ford sweep to a fixpoint, the other enumerates every
//! simple path. Both work over any [`CostModel`].

use thiserror::Error;

use crate::grid_model::{CellCoord, CostModel};

/// Largest side length accepted by [`brute_force_shortest_path`].
pub const BELLMAN_FORD_MAX_SIDE: usize = 64;
/// Largest side length accepted by [`enumerate_simple_paths`].
pub const ENUMERATION_MAX_SIDE: usize = 4;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("oracle limited to {max}x{max} grids, got {width}x{height}")]
    TooLarge { width: usize, height: usize, max: usize },
    #[error("cell {0} is outside the grid")]
    OutOfBounds(CellCoord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Optimal cost, or `None` when the goal is unreachable.
    pub cost: Option<f64>,
    /// One optimal cell sequence (empty when unreachable).
    pub cells: Vec<CellCoord>,
}

// own neighbor enumeration, in a different order from the planners
const OFFSETS: [(isize, isize); 8] = [(1, 1), (0, 1), (-1, 1), (1, 0), (-1, 0), (1, -1), (0, -1), (-1, -1)];

fn guard<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
    max: usize,
) -> Result<(), OracleError> {
    let g = model.grid();
    if g.width() > max || g.height() > max {
        return Err(OracleError::TooLarge {
            width: g.width(),
            height: g.height(),
            max,
        });
    }
    for c in [start, goal] {
        if !g.in_bounds(c) {
            return Err(OracleError::OutOfBounds(c));
        }
    }
    Ok(())
}

fn edges<M: CostModel + ?Sized>(model: &M, u: CellCoord) -> Vec<(CellCoord, f64)> {
    let g = model.grid();
    let mut out = Vec::new();
    for (dx, dy) in OFFSETS {
        let (x, y) = (u.x as isize + dx, u.y as isize + dy);
        if x < 0 || y < 0 {
            continue;
        }
        let v = CellCoord::new(x as usize, y as usize);
        if !g.in_bounds(v) || !g.is_passable(v) {
            continue;
        }
        // diagonal moves need both orthogonal companions open
        if dx != 0 && dy != 0 {
            let a = CellCoord::new(x as usize, u.y);
            let b = CellCoord::new(u.x, y as usize);
            if !g.is_passable(a) || !g.is_passable(b) {
                continue;
            }
        }
        out.push((v, model.step_cost(u, v)));
    }
    out
}

/// Exact shortest path by relaxing every edge until nothing changes.
pub fn brute_force_shortest_path<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
) -> Result<OracleResult, OracleError> {
    guard(model, start, goal, BELLMAN_FORD_MAX_SIDE)?;
    let g = model.grid();
    let unreachable = OracleResult {
        cost: None,
        cells: Vec::new(),
    };
    if !g.is_passable(start) || !g.is_passable(goal) {
        return Ok(unreachable);
    }
    let n = g.width() * g.height();
    let cell = |i: usize| CellCoord::new(i % g.width(), i / g.width());
    let adjacency: Vec<Vec<(CellCoord, f64)>> = (0..n)
        .map(|i| if g.is_passable(cell(i)) { edges(model, cell(i)) } else { Vec::new() })
        .collect();

    let mut dist = vec![f64::INFINITY; n];
    let mut pred = vec![usize::MAX; n];
    dist[start.y * g.width() + start.x] = 0.0;
    loop {
        let mut changed = false;
        for u in 0..n {
            if !dist[u].is_finite() {
                continue;
            }
            for &(v, w) in &adjacency[u] {
                let vi = v.y * g.width() + v.x;
                if dist[u] + w < dist[vi] {
                    dist[vi] = dist[u] + w;
                    pred[vi] = u;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }

    let gi = goal.y * g.width() + goal.x;
    if !dist[gi].is_finite() {
        return Ok(unreachable);
    }
    let mut cells = vec![goal];
    let mut cur = gi;
    while pred[cur] != usize::MAX {
        cur = pred[cur];
        cells.push(cell(cur));
    }
    cells.reverse();
    Ok(OracleResult {
        cost: Some(dist[gi]),
        cells,
    })
}

/// Minimum cost over every simple path, by exhaustive depth-first search.
pub fn enumerate_simple_paths<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
) -> Result<OracleResult, OracleError> {
    guard(model, start, goal, ENUMERATION_MAX_SIDE)?;
    let g = model.grid();
    if !g.is_passable(start) || !g.is_passable(goal) {
        return Ok(OracleResult {
            cost: None,
            cells: Vec::new(),
        });
    }

    struct Search<'m, M: ?Sized> {
        model: &'m M,
        goal: CellCoord,
        best: Option<(f64, Vec<CellCoord>)>,
        stack: Vec<CellCoord>,
    }

    impl<M: CostModel + ?Sized> Search<'_, M> {
        fn dfs(&mut self, u: CellCoord, visited: u16, cost: f64) {
            if u == self.goal {
                if self.best.as_ref().is_none_or(|(b, _)| cost < *b) {
                    self.best = Some((cost, self.stack.clone()));
                }
                return;
            }
            let w = self.model.grid().width();
            for (v, step) in edges(self.model, u) {
                let bit = 1u16 << (v.y * w + v.x);
                if visited & bit != 0 {
                    continue;
                }
                self.stack.push(v);
                self.dfs(v, visited | bit, cost + step);
                self.stack.pop();
            }
        }
    }

    let mut s = Search {
        model,
        goal,
        best: None,
        stack: vec![start],
    };
    s.dfs(start, 1u16 << (start.y * g.width() + start.x), 0.0);
    Ok(match s.best {
        Some((cost, cells)) => OracleResult { cost: Some(cost), cells },
        None => OracleResult {
            cost: None,
            cells: Vec::new(),
        },
    })
}
