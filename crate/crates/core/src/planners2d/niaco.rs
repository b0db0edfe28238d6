//! Ant colony search with a decaying greediness schedule, a rising
//! evaporation schedule and shrinking pheromone increments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid_model::{direction_index, CellCoord, CostModel, Path, WeightedGrid};
use crate::planning::{check_endpoints, MemoryMeter, PlanError, PlanOutcome, PlanStats};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NiacoParams {
    pub n_ants: usize,
    pub n_iterations: usize,
    pub alpha: f64,
    pub beta: f64,
    pub q0_start: f64,
    pub q0_end: f64,
    pub rho_start: f64,
    pub rho_end: f64,
    #[serde(alias = "deposit_Q")]
    pub deposit_q: f64,
    pub deposit_decay: f64,
    pub tau0: f64,
    pub seed: u64,
}

impl Default for NiacoParams {
    fn default() -> Self {
        NiacoParams {
            n_ants: 32,
            n_iterations: 200,
            alpha: 1.0,
            beta: 3.0,
            q0_start: 0.9,
            q0_end: 0.2,
            rho_start: 0.1,
            rho_end: 0.3,
            deposit_q: 100.0,
            deposit_decay: 0.99,
            tau0: 1.0,
            seed: 0,
        }
    }
}

impl NiacoParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |msg: String| Err(PlanError::Params(msg));
        if !(0.0 <= self.q0_end && self.q0_end <= self.q0_start && self.q0_start <= 1.0) {
            return bad(format!(
                "need 0 <= q0_end <= q0_start <= 1, got q0_start {} q0_end {}",
                self.q0_start, self.q0_end
            ));
        }
        for (name, rho) in [("rho_start", self.rho_start), ("rho_end", self.rho_end)] {
            if !(rho > 0.0 && rho < 1.0) {
                return bad(format!("{name} must be in (0, 1), got {rho}"));
            }
        }
        if !(self.tau0 > 0.0 && self.tau0.is_finite()) {
            return bad(format!("tau0 must be > 0, got {}", self.tau0));
        }
        if !(self.deposit_decay > 0.0 && self.deposit_decay <= 1.0) {
            return bad(format!("deposit_decay must be in (0, 1], got {}", self.deposit_decay));
        }
        if !(self.deposit_q >= 0.0 && self.deposit_q.is_finite()) {
            return bad(format!("deposit_q must be >= 0, got {}", self.deposit_q));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite()) {
            return bad("alpha and beta must be finite".into());
        }
        Ok(())
    }

    fn fraction(&self, t: usize) -> f64 {
        if self.n_iterations <= 1 {
            0.0
        } else {
            t as f64 / (self.n_iterations - 1) as f64
        }
    }

    /// Greediness at iteration `t`.
    pub fn q0_at(&self, t: usize) -> f64 {
        self.q0_start + (self.q0_end - self.q0_start) * self.fraction(t)
    }

    /// Evaporation rate at iteration `t`.
    pub fn rho_at(&self, t: usize) -> f64 {
        self.rho_start + (self.rho_end - self.rho_start) * self.fraction(t)
    }

    /// Pheromone added per edge by a path of `cost` at iteration `t`.
    pub fn deposit_at(&self, cost: f64, t: usize) -> f64 {
        self.deposit_q / cost * self.deposit_decay.powi(t as i32)
    }
}

/// Directed pheromone levels, one per cell and Moore direction.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneTable {
    width: usize,
    tau: Vec<f64>,
    tau_min: f64,
    tau_max: f64,
}

/// Bytes accounted per pheromone entry.
pub const PHEROMONE_ENTRY_BYTES: u64 = std::mem::size_of::<f64>() as u64;
/// Bytes accounted per tabu stamp.
pub const TABU_ENTRY_BYTES: u64 = std::mem::size_of::<u32>() as u64;
/// Bytes accounted per stored path cell.
pub const PATH_CELL_BYTES: u64 = std::mem::size_of::<u32>() as u64;

impl PheromoneTable {
    pub fn new(width: usize, height: usize, tau0: f64) -> Self {
        PheromoneTable {
            width,
            tau: vec![tau0; width * height * 8],
            tau_min: tau0 * 1e-3,
            tau_max: tau0 * 1e3,
        }
    }

    pub fn for_grid(grid: &WeightedGrid, tau0: f64) -> Self {
        Self::new(grid.width(), grid.height(), tau0)
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    pub fn bytes(&self) -> u64 {
        self.tau.len() as u64 * PHEROMONE_ENTRY_BYTES
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.tau_min, self.tau_max)
    }

    fn slot(&self, u: CellCoord, v: CellCoord) -> usize {
        let dir = direction_index(u, v).expect("pheromone lookup on a non-neighbor pair");
        (u.y * self.width + u.x) * 8 + dir
    }

    /// Level on the directed edge `u -> v`; the cells must be Moore neighbors.
    pub fn get(&self, u: CellCoord, v: CellCoord) -> f64 {
        self.tau[self.slot(u, v)]
    }

    pub fn set(&mut self, u: CellCoord, v: CellCoord, value: f64) {
        let i = self.slot(u, v);
        self.tau[i] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.tau
    }
}

/// Attractiveness `tau^alpha * eta^beta` of each allowed move.
pub fn niaco_attractiveness<M: CostModel + ?Sized>(
    model: &M,
    current: CellCoord,
    allowed: &[CellCoord],
    tau: &PheromoneTable,
    goal: CellCoord,
    p: &NiacoParams,
) -> Vec<f64> {
    let min_w = model.grid().min_passable_weight().unwrap_or(0.0);
    allowed
        .iter()
        .map(|&j| {
            let eta = 1.0 / (model.step_cost(current, j) + model.straight_distance(j, goal) * min_w);
            tau.get(current, j).powf(p.alpha) * eta.powf(p.beta)
        })
        .collect()
}

/// Probabilities of the sampling branch; uniform when every weight is zero.
pub fn niaco_probabilities(attractiveness: &[f64]) -> Vec<f64> {
    let sum: f64 = attractiveness.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        attractiveness.iter().map(|a| a / sum).collect()
    } else {
        vec![1.0 / attractiveness.len() as f64; attractiveness.len()]
    }
}

/// Choose the next cell among `allowed` (non-empty, in scan order).
#[allow(clippy::too_many_arguments)]
pub fn niaco_transition<M: CostModel + ?Sized, R: Rng + ?Sized>(
    model: &M,
    current: CellCoord,
    allowed: &[CellCoord],
    tau: &PheromoneTable,
    goal: CellCoord,
    q0_t: f64,
    p: &NiacoParams,
    rng: &mut R,
) -> CellCoord {
    assert!(!allowed.is_empty(), "niaco_transition needs at least one allowed move");
    let a = niaco_attractiveness(model, current, allowed, tau, goal, p);
    if rng.gen::<f64>() < q0_t {
        let mut best = 0;
        for i in 1..a.len() {
            if a[i] > a[best] {
                best = i;
            }
        }
        return allowed[best];
    }
    let probs = niaco_probabilities(&a);
    let mut r = rng.gen::<f64>();
    for (i, &pr) in probs.iter().enumerate() {
        if r < pr {
            return allowed[i];
        }
        r -= pr;
    }
    // rounding left r just above the last bucket
    let last = probs.iter().rposition(|&pr| pr > 0.0).unwrap_or(probs.len() - 1);
    allowed[last]
}

/// Evaporate every entry, then deposit along each goal-reaching path and clamp.
pub fn niaco_update_pheromone(tau: &mut PheromoneTable, ant_paths: &[Path], t: usize, p: &NiacoParams) {
    let keep = 1.0 - p.rho_at(t);
    for v in tau.tau.iter_mut() {
        *v *= keep;
    }
    for path in ant_paths {
        if path.total_cost <= 0.0 {
            continue;
        }
        let delta = p.deposit_at(path.total_cost, t);
        for pair in path.cells.windows(2) {
            let i = tau.slot(pair[0], pair[1]);
            tau.tau[i] += delta;
        }
    }
    let (lo, hi) = tau.bounds();
    for v in tau.tau.iter_mut() {
        *v = v.clamp(lo, hi);
    }
}

/// Accounted bytes of a NIACO run whose start equals its goal.
pub const NIACO_START_BYTES: u64 = PATH_CELL_BYTES;

pub fn plan_niaco<M: CostModel + ?Sized>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
    p: &NiacoParams,
) -> Result<PlanOutcome, PlanError> {
    let grid = model.grid();
    check_endpoints(grid, start, goal)?;
    p.validate()?;

    let mut meter = MemoryMeter::new();
    if start == goal {
        meter.alloc(NIACO_START_BYTES);
        return Ok(PlanOutcome {
            path: Some(Path::trivial(start)),
            stats: PlanStats {
                peak_memory: meter.peak(),
                best_cost_trace: vec![(0, 0.0)],
                ..PlanStats::default()
            },
        });
    }

    let mut tau = PheromoneTable::for_grid(grid, p.tau0);
    meter.alloc(tau.bytes());
    // tabu[i] == stamp marks cell i as visited by the current ant
    let mut tabu = vec![0u32; grid.len()];
    meter.alloc(grid.len() as u64 * TABU_ENTRY_BYTES);
    let mut stamp = 0u32;

    let mut best: Option<Path> = None;
    let mut trace = Vec::new();
    let mut moves = 0u64;
    let mut allowed = Vec::with_capacity(8);

    for t in 0..p.n_iterations {
        let q0 = p.q0_at(t);
        let mut finished: Vec<Path> = Vec::new();
        let mut iteration_bytes = 0u64;
        for k in 0..p.n_ants {
            let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
            rng.set_stream((t * p.n_ants + k) as u64);
            stamp += 1;
            let mut cur = start;
            tabu[grid.index(cur)] = stamp;
            let mut cells = vec![cur];
            while cur != goal {
                allowed.clear();
                allowed.extend(
                    grid.neighbor_moves(cur)
                        .map(|(_, v)| v)
                        .filter(|&v| tabu[grid.index(v)] != stamp),
                );
                if allowed.is_empty() {
                    break;
                }
                cur = niaco_transition(model, cur, &allowed, &tau, goal, q0, p, &mut rng);
                tabu[grid.index(cur)] = stamp;
                cells.push(cur);
                moves += 1;
            }
            if cur == goal {
                let bytes = cells.len() as u64 * PATH_CELL_BYTES;
                meter.alloc(bytes);
                iteration_bytes += bytes;
                finished.push(Path::from_cells(model, cells)?);
            } else {
                let bytes = cells.len() as u64 * PATH_CELL_BYTES;
                meter.alloc(bytes);
                meter.free(bytes);
            }
        }

        let improved = finished
            .iter()
            .min_by(|a, b| a.total_cost.total_cmp(&b.total_cost))
            .filter(|cand| best.as_ref().is_none_or(|b| cand.total_cost < b.total_cost))
            .cloned();
        if let Some(path) = improved {
            if let Some(old) = &best {
                meter.free(old.cells.len() as u64 * PATH_CELL_BYTES);
            }
            meter.alloc(path.cells.len() as u64 * PATH_CELL_BYTES);
            trace.push((t as u64, path.total_cost));
            best = Some(path);
        }

        niaco_update_pheromone(&mut tau, &finished, t, p);
        meter.free(iteration_bytes);
    }

    Ok(PlanOutcome {
        path: best,
        stats: PlanStats {
            expanded: moves,
            iterations: p.n_iterations as u64,
            peak_memory: meter.peak(),
            best_cost_trace: trace,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::PlanarCost;

    fn c(x: usize, y: usize) -> CellCoord {
        CellCoord::new(x, y)
    }

    #[test]
    fn schedules_interpolate_linearly() {
        let p = NiacoParams {
            n_iterations: 11,
            ..NiacoParams::default()
        };
        assert_eq!(p.q0_at(0), 0.9);
        assert!((p.q0_at(10) - 0.2).abs() < 1e-15);
        assert!((p.rho_at(5) - 0.2).abs() < 1e-15);
        let single = NiacoParams {
            n_iterations: 1,
            ..p
        };
        assert_eq!(single.rho_at(0), single.rho_start);
    }

    #[test]
    fn params_reject_bad_ranges() {
        let d = NiacoParams::default();
        assert!(d.validate().is_ok());
        assert!(NiacoParams { q0_end: 0.95, ..d }.validate().is_err());
        assert!(NiacoParams { rho_start: 0.0, ..d }.validate().is_err());
        assert!(NiacoParams { rho_end: 1.0, ..d }.validate().is_err());
        assert!(NiacoParams { tau0: 0.0, ..d }.validate().is_err());
        assert!(NiacoParams { deposit_decay: 0.0, ..d }.validate().is_err());
        assert!(NiacoParams { deposit_decay: 1.5, ..d }.validate().is_err());
    }

    #[test]
    fn deposit_q_accepts_both_spellings() {
        let a: NiacoParams = serde_json::from_str(r#"{"deposit_Q": 7.0}"#).unwrap();
        let b: NiacoParams = serde_json::from_str(r#"{"deposit_q": 7.0}"#).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.deposit_q, 7.0);
    }

    #[test]
    fn pheromone_table_size() {
        let t = PheromoneTable::new(5, 3, 1.0);
        assert_eq!(t.len(), 5 * 3 * 8);
        assert_eq!(t.bytes(), 5 * 3 * 8 * 8);
        assert_eq!(t.bounds(), (1e-3, 1e3));
    }

    #[test]
    fn evaporation_only_without_paths() {
        let p = NiacoParams {
            n_iterations: 5,
            ..NiacoParams::default()
        };
        let mut tau = PheromoneTable::new(3, 3, 1.0);
        tau.set(c(1, 1), c(2, 1), 4.0);
        niaco_update_pheromone(&mut tau, &[], 2, &p);
        let keep = 1.0 - p.rho_at(2);
        assert_eq!(tau.get(c(1, 1), c(2, 1)), 4.0 * keep);
        assert_eq!(tau.get(c(0, 0), c(1, 1)), keep);
    }

    #[test]
    fn deposit_arithmetic() {
        let grid = WeightedGrid::uniform(3, 1, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        let p = NiacoParams {
            deposit_q: 2.0,
            deposit_decay: 1.0,
            n_iterations: 10,
            ..NiacoParams::default()
        };
        let path = Path::from_cells(&model, vec![c(0, 0), c(1, 0), c(2, 0)]).unwrap();
        assert_eq!(path.total_cost, 2.0);
        let mut tau = PheromoneTable::new(3, 1, 1.0);
        niaco_update_pheromone(&mut tau, std::slice::from_ref(&path), 0, &p);
        let keep = 1.0 - p.rho_at(0);
        assert_eq!(tau.get(c(0, 0), c(1, 0)), keep + 1.0);
        assert_eq!(tau.get(c(1, 0), c(2, 0)), keep + 1.0);
        assert_eq!(tau.get(c(1, 0), c(0, 0)), keep);

        let decayed = NiacoParams {
            deposit_decay: 0.5,
            ..p
        };
        let d3 = decayed.deposit_at(path.total_cost, 3);
        let d4 = decayed.deposit_at(path.total_cost, 4);
        assert_eq!(d4, d3 * 0.5);
    }

    #[test]
    fn pheromone_stays_clamped() {
        let grid = WeightedGrid::uniform(2, 1, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        let p = NiacoParams {
            deposit_q: 1e9,
            n_iterations: 400,
            ..NiacoParams::default()
        };
        let path = Path::from_cells(&model, vec![c(0, 0), c(1, 0)]).unwrap();
        let mut tau = PheromoneTable::new(2, 1, 1.0);
        for t in 0..400 {
            niaco_update_pheromone(&mut tau, std::slice::from_ref(&path), t, &p);
        }
        assert_eq!(tau.get(c(0, 0), c(1, 0)), 1e3);
        assert_eq!(tau.get(c(1, 0), c(0, 0)), 1e-3);
    }

    #[test]
    fn greedy_transition_takes_argmax() {
        let grid = WeightedGrid::uniform(5, 5, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        let tau = PheromoneTable::new(5, 5, 1.0);
        let p = NiacoParams::default();
        let cur = c(2, 2);
        let allowed = grid.neighbors(cur);
        let a = niaco_attractiveness(&model, cur, &allowed, &tau, c(4, 2), &p);
        let expected = allowed[a
            .iter()
            .enumerate()
            .fold(0, |b, (i, &v)| if v > a[b] { i } else { b })];
        assert_eq!(expected, c(3, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            assert_eq!(niaco_transition(&model, cur, &allowed, &tau, c(4, 2), 1.0, &p, &mut rng), expected);
        }
    }

    #[test]
    fn greedy_ties_go_to_scan_order() {
        let grid = WeightedGrid::uniform(3, 3, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        let tau = PheromoneTable::new(3, 3, 1.0);
        let p = NiacoParams::default();
        // goal straight below: W and E are symmetric, so are SW and SE
        let allowed = [c(0, 0), c(2, 0)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(niaco_transition(&model, c(1, 0), &allowed, &tau, c(1, 2), 1.0, &p, &mut rng), c(0, 0));
    }

    #[test]
    fn sampled_probabilities_normalize() {
        let grid = WeightedGrid::new(3, 3, (1..=9).map(|w| Some(w as f64)).collect()).unwrap();
        let model = PlanarCost::new(&grid);
        let mut tau = PheromoneTable::new(3, 3, 1.0);
        tau.set(c(1, 1), c(0, 0), 7.5);
        let cur = c(1, 1);
        let allowed = grid.neighbors(cur);
        let a = niaco_attractiveness(&model, cur, &allowed, &tau, c(2, 2), &NiacoParams::default());
        let sum: f64 = niaco_probabilities(&a).iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert_eq!(niaco_probabilities(&[0.0, 0.0]), vec![0.5, 0.5]);
    }

    #[test]
    fn uniform_sampling_passes_chi_square() {
        // center of a symmetric 3x3 whose goal is the center itself: all
        // eight moves have equal attractiveness
        let grid = WeightedGrid::uniform(3, 3, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        let tau = PheromoneTable::new(3, 3, 1.0);
        let p = NiacoParams {
            beta: 0.0,
            ..NiacoParams::default()
        };
        let cur = c(1, 1);
        let allowed = grid.neighbors(cur);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 10_000;
        let mut counts = [0usize; 8];
        for _ in 0..draws {
            let j = niaco_transition(&model, cur, &allowed, &tau, cur, 0.0, &p, &mut rng);
            counts[allowed.iter().position(|&a| a == j).unwrap()] += 1;
        }
        let expected = draws as f64 / 8.0;
        let sigma = (draws as f64 * (1.0 / 8.0) * (7.0 / 8.0)).sqrt();
        for &n in &counts {
            assert!((n as f64 - expected).abs() < 3.0 * sigma, "{counts:?}");
        }
        let chi2: f64 = counts
            .iter()
            .map(|&n| (n as f64 - expected).powi(2) / expected)
            .sum();
        // 99.9th percentile of chi-square with 7 degrees of freedom
        assert!(chi2 < 24.32, "chi2 = {chi2}");
    }

    #[test]
    fn trivial_run_accounts_one_cell() {
        let grid = WeightedGrid::uniform(4, 4, 1.0).unwrap();
        let out = plan_niaco(&PlanarCost::new(&grid), c(1, 1), c(1, 1), &NiacoParams::default()).unwrap();
        assert_eq!(out.cost(), Some(0.0));
        assert_eq!(out.stats.iterations, 0);
        assert_eq!(out.stats.peak_memory, NIACO_START_BYTES);
    }

    #[test]
    fn memory_covers_pheromone_and_tabu() {
        let grid = WeightedGrid::uniform(6, 5, 1.0).unwrap();
        let p = NiacoParams {
            n_iterations: 3,
            n_ants: 2,
            ..NiacoParams::default()
        };
        let out = plan_niaco(&PlanarCost::new(&grid), c(0, 0), c(5, 4), &p).unwrap();
        let fixed = 30 * 8 * PHEROMONE_ENTRY_BYTES + 30 * TABU_ENTRY_BYTES;
        assert!(out.stats.peak_memory > fixed);
        assert!(out.stats.peak_memory < fixed + 30 * 3 * PATH_CELL_BYTES);
    }

    #[test]
    fn dead_ends_yield_no_path() {
        let mut cells = vec![Some(1.0); 9];
        cells[1] = None;
        cells[3] = None;
        cells[4] = None;
        let grid = WeightedGrid::new(3, 3, cells).unwrap();
        let out = plan_niaco(&PlanarCost::new(&grid), c(0, 0), c(2, 2), &NiacoParams::default()).unwrap();
        assert!(out.path.is_none());
        assert!(out.stats.best_cost_trace.is_empty());
    }

    #[test]
    fn open_grid_converges_with_monotone_trace() {
        let grid = WeightedGrid::uniform(20, 20, 1.0).unwrap();
        let model = PlanarCost::new(&grid);
        let (start, goal) = (c(0, 0), c(19, 19));
        let opt = crate::planners2d::plan_dijkstra_2d(&grid, start, goal).unwrap().cost().unwrap();
        let mut good = 0;
        for seed in 0..20 {
            let out = plan_niaco(&model, start, goal, &NiacoParams { seed, ..NiacoParams::default() }).unwrap();
            let trace = &out.stats.best_cost_trace;
            assert!(trace.windows(2).all(|w| w[1].1 < w[0].1 && w[1].0 > w[0].0));
            if let Some(path) = &out.path {
                path.validate(&model).unwrap();
                assert!(crate::grid_model::costs_match(trace.last().unwrap().1, path.total_cost));
                if path.total_cost <= 1.2 * opt {
                    good += 1;
                }
            }
        }
        assert!(good >= 16, "{good}/20 within 20%");
    }

    #[test]
    fn same_seed_same_outcome() {
        let grid = WeightedGrid::new(12, 12, (0..144).map(|i| Some((i % 5 + 1) as f64)).collect()).unwrap();
        let model = PlanarCost::new(&grid);
        let p = NiacoParams { n_iterations: 20, n_ants: 8, seed: 5, ..NiacoParams::default() };
        let a = plan_niaco(&model, c(0, 0), c(11, 7), &p).unwrap();
        assert_eq!(a, plan_niaco(&model, c(0, 0), c(11, 7), &p).unwrap());
    }
}
