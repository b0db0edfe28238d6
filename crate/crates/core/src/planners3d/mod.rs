//! Elevation-aware planners: (weights, elevation) scenes planned on the
//! pixel lattice under the terrain metric.

mod rrt_connect;

pub use rrt_connect::{plan_rrtconnect, rrt_connect_extend, ConnectTree, ExtendStatus, RRTCONNECT_START_BYTES};

use crate::grid_model::{Cost3DParams, CellCoord, ElevationField, GridError, TerrainCost, WeightedGrid};
use crate::planners2d::{plan_astar, plan_dijkstra, plan_niaco, NiacoParams, RrtParams};
use crate::planning::{HeuristicScale, PlanError, PlanOutcome};

/// A weight map, its elevation field and the terrain cost parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene3D {
    grid: WeightedGrid,
    elev: ElevationField,
    cost: Cost3DParams,
}

impl Scene3D {
    pub fn new(grid: WeightedGrid, elev: ElevationField, cost: Cost3DParams) -> Result<Self, GridError> {
        if (grid.width(), grid.height()) != (elev.width(), elev.height()) {
            return Err(GridError::DimensionMismatch {
                weights: (grid.width(), grid.height()),
                elevation: (elev.width(), elev.height()),
            });
        }
        cost.validate()?;
        Ok(Scene3D { grid, elev, cost })
    }

    /// Constant elevation over `grid`.
    pub fn flat(grid: WeightedGrid, cost: Cost3DParams) -> Result<Self, GridError> {
        let elev = ElevationField::flat(grid.width(), grid.height(), 0.0)?;
        Self::new(grid, elev, cost)
    }

    pub fn grid(&self) -> &WeightedGrid {
        &self.grid
    }

    pub fn elevation(&self) -> &ElevationField {
        &self.elev
    }

    pub fn cost_params(&self) -> &Cost3DParams {
        &self.cost
    }

    /// A fresh cost model; any gradient cache lives as long as the model.
    pub fn cost_model(&self) -> TerrainCost<'_> {
        TerrainCost::new(&self.grid, &self.elev, self.cost)
    }
}

pub fn plan_dijkstra_3d(scene: &Scene3D, start: CellCoord, goal: CellCoord) -> Result<PlanOutcome, PlanError> {
    plan_dijkstra(&scene.cost_model(), start, goal)
}

/// A* with the 3D straight-line heuristic.
pub fn plan_astar_3d(
    scene: &Scene3D,
    start: CellCoord,
    goal: CellCoord,
    scale: HeuristicScale,
) -> Result<PlanOutcome, PlanError> {
    plan_astar(&scene.cost_model(), start, goal, scale)
}

pub fn plan_niaco_3d(
    scene: &Scene3D,
    start: CellCoord,
    goal: CellCoord,
    p: &NiacoParams,
) -> Result<PlanOutcome, PlanError> {
    plan_niaco(&scene.cost_model(), start, goal, p)
}

pub fn plan_rrtconnect_3d(
    scene: &Scene3D,
    start: CellCoord,
    goal: CellCoord,
    p: &RrtParams,
) -> Result<PlanOutcome, PlanError> {
    plan_rrtconnect(&scene.cost_model(), start, goal, p)
}

/// 3D heuristic `sqrt(dx² + dy² + (κ·dz/res)²) × scale`.
pub fn astar3d_heuristic(dx: f64, dy: f64, scaled_rise: f64, scale: f64) -> f64 {
    (dx * dx + dy * dy + scaled_rise * scaled_rise).sqrt() * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_model::{path_cost, CostModel, PlanarCost};
    use crate::planners2d::{plan_astar_2d, plan_dijkstra_2d};

    fn c(x: usize, y: usize) -> CellCoord {
        CellCoord::new(x, y)
    }

    #[test]
    fn scene_rejects_mismatch() {
        let grid = WeightedGrid::uniform(3, 3, 1.0).unwrap();
        let elev = ElevationField::flat(3, 4, 0.0).unwrap();
        assert!(matches!(
            Scene3D::new(grid.clone(), elev, Cost3DParams::default()),
            Err(GridError::DimensionMismatch { .. })
        ));
        let bad = Cost3DParams {
            gradient_window: 2,
            ..Cost3DParams::default()
        };
        assert!(Scene3D::flat(grid, bad).is_err());
    }

    #[test]
    fn heuristic_pythagoras() {
        assert_eq!(astar3d_heuristic(3.0, 0.0, 4.0, 1.0), 5.0);
        let grid = WeightedGrid::uniform(4, 1, 1.0).unwrap();
        let elev = ElevationField::from_fn(4, 1, 1.0, |p| if p.x == 3 { 4.0 } else { 0.0 }).unwrap();
        let scene = Scene3D::new(grid, elev, Cost3DParams::default()).unwrap();
        assert_eq!(scene.cost_model().straight_distance(c(0, 0), c(3, 0)), 5.0);
    }

    #[test]
    fn flat_scene_reduces_to_planar() {
        let grid = WeightedGrid::new(5, 4, (0..20).map(|i| (i != 7).then_some((i % 4 + 1) as f64)).collect())
            .unwrap();
        let scene = Scene3D::flat(
            grid.clone(),
            Cost3DParams {
                kappa: 3.0,
                gradient_penalty: 2.0,
                ..Cost3DParams::default()
            },
        )
        .unwrap();
        assert_eq!(
            plan_dijkstra_3d(&scene, c(0, 0), c(4, 3)).unwrap(),
            plan_dijkstra_2d(&grid, c(0, 0), c(4, 3)).unwrap()
        );
        assert_eq!(
            plan_astar_3d(&scene, c(0, 0), c(4, 3), HeuristicScale::Auto).unwrap(),
            plan_astar_2d(&grid, c(0, 0), c(4, 3), HeuristicScale::Auto).unwrap()
        );
    }

    #[test]
    fn ridge_forces_detour() {
        let scene = ridge_scene();
        let (start, goal) = (c(15, 2), c(15, 18));
        let path = plan_dijkstra_3d(&scene, start, goal).unwrap().path.unwrap();
        let straight: Vec<_> = (2..=18).map(|y| c(15, y)).collect();
        let over = path_cost(&scene.cost_model(), &straight).unwrap();
        assert!(path.total_cost < over);
        assert!(path.cells.iter().all(|p| p.y != 10 || p.x <= 1));
    }

    fn ridge_scene() -> Scene3D {
        // uniform 21x21 with a tall ridge on row 10, open at the far left
        let n = 21;
        let grid = WeightedGrid::uniform(n, n, 1.0).unwrap();
        let elev = ElevationField::from_fn(n, n, 1.0, |p| if p.y == 10 && p.x > 1 { 50.0 } else { 0.0 }).unwrap();
        Scene3D::new(
            grid,
            elev,
            Cost3DParams {
                kappa: 5.0,
                ..Cost3DParams::default()
            },
        )
        .unwrap()
    }

    fn mean_rise(scene: &Scene3D, cells: &[CellCoord]) -> f64 {
        let e = scene.elevation();
        let total: f64 = cells.windows(2).map(|w| (e.z(w[1]) - e.z(w[0])).abs()).sum();
        total / (cells.len() - 1) as f64
    }

    #[test]
    fn niaco3d_climbs_less_than_straight_line() {
        let scene = ridge_scene();
        let straight: Vec<_> = (2..=18).map(|y| c(15, y)).collect();
        let p = NiacoParams {
            n_iterations: 60,
            ..NiacoParams::default()
        };
        let path = plan_niaco_3d(&scene, c(15, 2), c(15, 18), &p).unwrap().path.unwrap();
        path.validate(&scene.cost_model()).unwrap();
        assert!(mean_rise(&scene, &path.cells) < mean_rise(&scene, &straight));
    }

    #[test]
    fn sampling_planners_reduce_on_flat_terrain() {
        let grid = WeightedGrid::new(
            12,
            12,
            (0..144).map(|i| (i % 11 != 3).then_some((i % 3 + 1) as f64)).collect(),
        )
        .unwrap();
        let scene = Scene3D::flat(
            grid.clone(),
            Cost3DParams {
                kappa: 2.0,
                gradient_penalty: 1.5,
                ..Cost3DParams::default()
            },
        )
        .unwrap();
        let planar = PlanarCost::new(&grid);
        let (s, g) = (c(0, 0), c(11, 10));
        let np = NiacoParams {
            n_iterations: 15,
            n_ants: 6,
            seed: 3,
            ..NiacoParams::default()
        };
        assert_eq!(plan_niaco_3d(&scene, s, g, &np).unwrap(), plan_niaco(&planar, s, g, &np).unwrap());
        let rp = RrtParams {
            max_iterations: 400,
            seed: 3,
            ..RrtParams::default()
        };
        assert_eq!(
            plan_rrtconnect_3d(&scene, s, g, &rp).unwrap(),
            plan_rrtconnect(&planar, s, g, &rp).unwrap()
        );
        assert_eq!(
            crate::planners2d::plan_rrtstar(&scene.cost_model(), s, g, &rp).unwrap(),
            crate::planners2d::plan_rrtstar(&planar, s, g, &rp).unwrap()
        );
    }
}
