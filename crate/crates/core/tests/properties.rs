use pathbench::bench::{aggregate_runs, emit_table, run_scenario_on, LoadedMaps, Metric, PlannerEntry, Scenario, TableFormat};
use pathbench::grid_model::{
    costs_match, path_cost, CellCoord, Cost3DParams, CostModel, ElevationEncoding, ElevationField, PlanarCost,
    TerrainCost, WeightEncoding, WeightedGrid,
};
use pathbench::oracle::{brute_force_shortest_path, enumerate_simple_paths};
use pathbench::planner::{PlannerKind, PlannerParams};
use pathbench::planners2d::{plan_astar, plan_dijkstra, plan_niaco, plan_rrtstar, NiacoParams, RrtParams};
use pathbench::planners3d::plan_rrtconnect;
use pathbench::planning::HeuristicScale;
use pathbench::raster_io::{palette, render_overlay, BitDepth, OverlayLayer, RasterGrid};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Instance {
    grid: WeightedGrid,
    elev: ElevationField,
    start: CellCoord,
    goal: CellCoord,
}

fn instance(max: usize) -> impl Strategy<Value = Instance> {
    (1..=max, 1..=max).prop_flat_map(|(w, h)| {
        (
            proptest::collection::vec(proptest::option::weighted(0.8, 1u8..=9), w * h),
            proptest::collection::vec(0u8..=20, w * h),
            0..w,
            0..h,
            0..w,
            0..h,
        )
            .prop_map(move |(mut cells, zs, sx, sy, gx, gy)| {
                for (x, y) in [(sx, sy), (gx, gy)] {
                    cells[y * w + x].get_or_insert(1);
                }
                let grid = WeightedGrid::new(w, h, cells.into_iter().map(|o| o.map(f64::from)).collect()).unwrap();
                let elev = ElevationField::new(w, h, zs.into_iter().map(f64::from).collect(), 1.0).unwrap();
                Instance {
                    grid,
                    elev,
                    start: CellCoord::new(sx, sy),
                    goal: CellCoord::new(gx, gy),
                }
            })
    })
}

fn cost3d() -> impl Strategy<Value = Cost3DParams> {
    (0.0f64..3.0, prop_oneof![Just(1usize), Just(3), Just(5)], 0.0f64..2.0).prop_map(|(kappa, k, lambda)| {
        Cost3DParams {
            kappa,
            gradient_window: k,
            gradient_penalty: lambda,
            memoize_gradient: false,
        }
    })
}

fn same_cost(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (None, None) => true,
        (Some(x), Some(y)) => costs_match(x, y),
        _ => false,
    }
}

fn lower_bounded<M: CostModel>(model: &M, out: Option<&pathbench::Path>, opt: Option<f64>) -> Result<(), TestCaseError> {
    if let Some(p) = out {
        prop_assert!(p.validate(model).is_ok());
        let opt = opt.expect("a stochastic path implies a Dijkstra path");
        prop_assert!(p.total_cost >= opt || costs_match(p.total_cost, opt));
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn dijkstra_matches_oracle_2d(inst in instance(12)) {
        let m = PlanarCost::new(&inst.grid);
        let d = plan_dijkstra(&m, inst.start, inst.goal).unwrap();
        let o = brute_force_shortest_path(&m, inst.start, inst.goal).unwrap();
        prop_assert!(same_cost(d.cost(), o.cost));
        if let Some(p) = &d.path {
            prop_assert!(p.validate(&m).is_ok());
        }
    }

    #[test]
    fn dijkstra_matches_oracle_3d(inst in instance(10), p in cost3d()) {
        let m = TerrainCost::new(&inst.grid, &inst.elev, p);
        let d = plan_dijkstra(&m, inst.start, inst.goal).unwrap();
        let o = brute_force_shortest_path(&m, inst.start, inst.goal).unwrap();
        prop_assert!(same_cost(d.cost(), o.cost));
    }

    #[test]
    fn astar_agrees_with_dijkstra(inst in instance(14), p in cost3d()) {
        let planar = PlanarCost::new(&inst.grid);
        // gradient penalty off for the 3D check
        let flat_penalty = Cost3DParams { gradient_penalty: 0.0, ..p };
        let terrain = TerrainCost::new(&inst.grid, &inst.elev, flat_penalty);
        let models: [&dyn CostModel; 2] = [&planar, &terrain];
        for m in models {
            let d = plan_dijkstra(m, inst.start, inst.goal).unwrap();
            let a = plan_astar(m, inst.start, inst.goal, HeuristicScale::Auto).unwrap();
            prop_assert!(same_cost(d.cost(), a.cost()));
            prop_assert!(a.stats.expanded <= d.stats.expanded);
        }
    }

    #[test]
    fn oracles_agree(inst in instance(4), p in cost3d()) {
        let planar = PlanarCost::new(&inst.grid);
        let terrain = TerrainCost::new(&inst.grid, &inst.elev, p);
        let models: [&dyn CostModel; 2] = [&planar, &terrain];
        for m in models {
            let bf = brute_force_shortest_path(m, inst.start, inst.goal).unwrap();
            let en = enumerate_simple_paths(m, inst.start, inst.goal).unwrap();
            prop_assert!(same_cost(bf.cost, en.cost));
            if let Some(c) = bf.cost {
                prop_assert!(costs_match(path_cost(m, &bf.cells).unwrap(), c));
            }
        }
    }

    #[test]
    fn uniform_flat_cost_is_polyline_length(w in 2usize..12, h in 2usize..12, seed in any::<u64>()) {
        let grid = WeightedGrid::uniform(w, h, 1.0).unwrap();
        let elev = ElevationField::flat(w, h, 3.0).unwrap();
        let m = TerrainCost::new(&grid, &elev, Cost3DParams::default());
        let out = plan_rrtstar(
            &m,
            CellCoord::new(0, 0),
            CellCoord::new(w - 1, h - 1),
            &RrtParams { max_iterations: 200, seed, ..RrtParams::default() },
        )
        .unwrap();
        if let Some(p) = out.path {
            let euclid: f64 = p.cells.windows(2).map(|s| s[0].distance(s[1])).sum();
            prop_assert!(costs_match(p.total_cost, euclid));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stochastic_planners_sound_and_seeded(inst in instance(12), p in cost3d(), seed in 0u64..1000) {
        let planar = PlanarCost::new(&inst.grid);
        let terrain = TerrainCost::new(&inst.grid, &inst.elev, p);
        let opt2 = plan_dijkstra(&planar, inst.start, inst.goal).unwrap().cost();
        let opt3 = plan_dijkstra(&terrain, inst.start, inst.goal).unwrap().cost();
        let rp = RrtParams { max_iterations: 400, seed, ..RrtParams::default() };
        let np = NiacoParams { n_iterations: 10, n_ants: 6, seed, ..NiacoParams::default() };
        let (s, g) = (inst.start, inst.goal);

        let r = plan_rrtstar(&planar, s, g, &rp).unwrap();
        prop_assert_eq!(&r, &plan_rrtstar(&planar, s, g, &rp).unwrap());
        lower_bounded(&planar, r.path.as_ref(), opt2)?;

        let n = plan_niaco(&planar, s, g, &np).unwrap();
        prop_assert_eq!(&n, &plan_niaco(&planar, s, g, &np).unwrap());
        lower_bounded(&planar, n.path.as_ref(), opt2)?;

        let rc = plan_rrtconnect(&terrain, s, g, &rp).unwrap();
        prop_assert_eq!(&rc, &plan_rrtconnect(&terrain, s, g, &rp).unwrap());
        lower_bounded(&terrain, rc.path.as_ref(), opt3)?;

        let n3 = plan_niaco(&terrain, s, g, &np).unwrap();
        prop_assert_eq!(&n3, &plan_niaco(&terrain, s, g, &np).unwrap());
        lower_bounded(&terrain, n3.path.as_ref(), opt3)?;
    }

    #[test]
    fn bench_records_recompute_and_table_shape(inst in instance(10), repeats in 1usize..3, seed in 0u64..100) {
        let mut ants = PlannerEntry::new(PlannerKind::Niaco3d);
        ants.spec.params = PlannerParams::Niaco(NiacoParams { n_iterations: 5, n_ants: 4, ..NiacoParams::default() });
        let mut rrt = PlannerEntry::new(PlannerKind::Rrtstar);
        rrt.spec.params = PlannerParams::Rrt(RrtParams { max_iterations: 200, ..RrtParams::default() });
        let planners = vec![PlannerEntry::new(PlannerKind::Astar), rrt, PlannerEntry::new(PlannerKind::Dijkstra3d), ants];
        let n_planners = planners.len();
        let s = Scenario {
            name: "prop".into(),
            weight_map: "unused".into(),
            elevation_map: Some("unused".into()),
            weights: WeightEncoding::default(),
            elevation: ElevationEncoding::default(),
            start: inst.start,
            goal: inst.goal,
            planners,
            repeats,
            base_seed: seed,
        };
        let maps = LoadedMaps { grid: inst.grid.clone(), elevation: Some(inst.elev.clone()) };
        let records = run_scenario_on(&s, &maps).unwrap();
        prop_assert_eq!(records.len(), n_planners * repeats);
        let planar = PlanarCost::new(&inst.grid);
        let terrain = TerrainCost::new(&inst.grid, &inst.elev, Cost3DParams::default());
        for r in &records {
            prop_assert_eq!(r.path_cost.is_some(), r.path.is_some());
            if let (Some(c), Some(p)) = (r.path_cost, &r.path) {
                let is_3d = r.planner.starts_with("3D");
                let again = if is_3d { path_cost(&terrain, &p.cells) } else { path_cost(&planar, &p.cells) };
                prop_assert!(costs_match(again.unwrap(), c));
            }
        }
        let again = run_scenario_on(&s, &maps).unwrap();
        let costs = |v: &[pathbench::bench::MetricsRecord]| v.iter().map(|r| r.path_cost.map(f64::to_bits)).collect::<Vec<_>>();
        prop_assert_eq!(costs(&records), costs(&again));

        let stats = aggregate_runs(&records).unwrap();
        let text = emit_table(&stats, TableFormat::Text).unwrap();
        // header + rule, then one row per (metric, planner)
        prop_assert_eq!(text.lines().count(), 2 + Metric::ALL.len() * n_planners);
    }

    #[test]
    fn overlay_pure_and_deterministic(
        w in 1usize..12,
        h in 1usize..12,
        vals in proptest::collection::vec(0u16..=255, 144),
        pts in proptest::collection::vec((0usize..12, 0usize..12), 0..20),
    ) {
        let base = RasterGrid::new(w, h, BitDepth::Eight, vals[..w * h].to_vec()).unwrap();
        let before = base.clone();
        let cells: Vec<_> = pts.iter().map(|&(x, y)| CellCoord::new(x % w, y % h)).collect();
        let layers = [
            OverlayLayer { cells: &cells, color: palette::DIJKSTRA },
            OverlayLayer { cells: &cells[..cells.len() / 2], color: palette::ASTAR },
        ];
        let a = render_overlay(&base, &layers).unwrap();
        let b = render_overlay(&base, &layers).unwrap();
        prop_assert_eq!(&base, &before);
        prop_assert_eq!(a, b);
    }
}
