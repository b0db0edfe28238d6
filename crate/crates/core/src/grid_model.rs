//! Weighted traversal grids, elevation fields and the edge-cost models
//! shared by every planner.
//!
//! Movement is on the 8-connected pixel lattice. A move between neighbors
//! `u` and `v` costs its step length (1 orthogonal, √2 diagonal) times the
//! mean of the two endpoint weights. Diagonal moves additionally require both
//! orthogonal companion cells to be passable, so paths never slip between two
//! blocked pixels that touch at a corner.
//!
//! The terrain model replaces the planar step length by the 3D length of the
//! step with vertical exaggeration `kappa`, and can multiply in a penalty
//! proportional to the mean local gradient around the target cell.

use std::cell::RefCell;
use std::f64::consts::SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster_io::RasterGrid;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("dimension mismatch: weights are {weights:?}, elevation is {elevation:?}")]
    DimensionMismatch {
        weights: (usize, usize),
        elevation: (usize, usize),
    },
    #[error("{0} is outside the grid")]
    OutOfBounds(CellCoord),
    #[error("{0} is impassable")]
    Impassable(CellCoord),
    #[error("{u} and {v} are not an allowed neighbor move")]
    NotNeighbors { u: CellCoord, v: CellCoord },
    #[error("path breaks adjacency at step {index}: {from} -> {to}")]
    BrokenAdjacency {
        index: usize,
        from: CellCoord,
        to: CellCoord,
    },
    #[error("path has no cells")]
    EmptyPath,
    #[error("stored path cost {stored} differs from recomputed cost {recomputed}")]
    CostMismatch { stored: f64, recomputed: f64 },
}

/// A pixel position: `x` is the column, `y` the row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct CellCoord {
    pub x: usize,
    pub y: usize,
}

impl CellCoord {
    pub const fn new(x: usize, y: usize) -> Self {
        CellCoord { x, y }
    }

    /// Squared Euclidean distance in pixels.
    pub fn dist_sq(self, other: CellCoord) -> u64 {
        let dx = self.x.abs_diff(other.x) as u64;
        let dy = self.y.abs_diff(other.y) as u64;
        dx * dx + dy * dy
    }

    pub fn distance(self, other: CellCoord) -> f64 {
        (self.dist_sq(other) as f64).sqrt()
    }

    fn offset(self, dx: isize, dy: isize) -> Option<CellCoord> {
        Some(CellCoord {
            x: self.x.checked_add_signed(dx)?,
            y: self.y.checked_add_signed(dy)?,
        })
    }
}

impl From<[usize; 2]> for CellCoord {
    fn from([x, y]: [usize; 2]) -> Self {
        CellCoord { x, y }
    }
}

impl From<CellCoord> for [usize; 2] {
    fn from(c: CellCoord) -> Self {
        [c.x, c.y]
    }
}

impl fmt::Display for CellCoord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Moore neighborhood offsets in scan order NW, N, NE, W, E, SW, S, SE.
pub const MOORE_OFFSETS: [(isize, isize); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Index into [`MOORE_OFFSETS`] of the move `u -> v`, if they are 8-neighbors.
pub fn direction_index(u: CellCoord, v: CellCoord) -> Option<usize> {
    let dx = v.x as isize - u.x as isize;
    let dy = v.y as isize - u.y as isize;
    MOORE_OFFSETS.iter().position(|&o| o == (dx, dy))
}

/// 1 for orthogonal neighbors, √2 for diagonal ones.
pub fn step_length(u: CellCoord, v: CellCoord) -> f64 {
    if u.x != v.x && u.y != v.y {
        SQRT_2
    } else {
        1.0
    }
}

/// How raster samples map to traversal weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightEncoding {
    pub impassable_value: u16,
    pub scale: f64,
}

impl Default for WeightEncoding {
    fn default() -> Self {
        WeightEncoding {
            impassable_value: 0,
            scale: 1.0,
        }
    }
}

/// Per-pixel traversal weights with an impassable mask.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGrid {
    width: usize,
    height: usize,
    weight: Vec<f64>,
    passable: Vec<bool>,
    min_weight: Option<f64>,
}

impl WeightedGrid {
    /// Build from per-cell weights; `None` marks an impassable cell.
    pub fn new(width: usize, height: usize, cells: Vec<Option<f64>>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::Parameter(format!(
                "grid must be at least 1x1, got {width}x{height}"
            )));
        }
        if cells.len() != width * height {
            return Err(GridError::Parameter(format!(
                "expected {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        let mut weight = Vec::with_capacity(cells.len());
        let mut passable = Vec::with_capacity(cells.len());
        for (i, c) in cells.into_iter().enumerate() {
            match c {
                Some(w) if w.is_finite() && w > 0.0 => {
                    weight.push(w);
                    passable.push(true);
                }
                Some(w) => {
                    return Err(GridError::Parameter(format!(
                        "passable cell ({}, {}) has weight {w}; weights must be finite and > 0",
                        i % width,
                        i / width
                    )))
                }
                None => {
                    weight.push(0.0);
                    passable.push(false);
                }
            }
        }
        let min_weight = weight
            .iter()
            .zip(&passable)
            .filter(|(_, &p)| p)
            .map(|(&w, _)| w)
            .reduce(f64::min);
        Ok(WeightedGrid {
            width,
            height,
            weight,
            passable,
            min_weight,
        })
    }

    pub fn uniform(width: usize, height: usize, weight: f64) -> Result<Self, GridError> {
        Self::new(width, height, vec![Some(weight); width * height])
    }

    /// Interpret raster samples as weights: `value × scale`, with samples equal
    /// to `impassable_value` marked impassable.
    ///
    /// A zero sample that is not the impassable value would yield a passable
    /// zero-weight cell and is rejected.
    pub fn from_raster_weights(
        raster: &RasterGrid,
        impassable_value: u16,
        scale: f64,
    ) -> Result<Self, GridError> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(GridError::Parameter(format!(
                "weight scale must be finite and > 0, got {scale}"
            )));
        }
        let cells = raster
            .values()
            .iter()
            .map(|&v| (v != impassable_value).then_some(v as f64 * scale))
            .collect();
        Self::new(raster.width(), raster.height(), cells)
    }

    pub fn from_raster(raster: &RasterGrid, enc: WeightEncoding) -> Result<Self, GridError> {
        Self::from_raster_weights(raster, enc.impassable_value, enc.scale)
    }

    /// Every weight multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self, GridError> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(GridError::Parameter(format!("scale must be > 0, got {s}")));
        }
        let cells = self
            .weight
            .iter()
            .zip(&self.passable)
            .map(|(&w, &p)| p.then_some(w * s))
            .collect();
        Self::new(self.width, self.height, cells)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.weight.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weight.is_empty()
    }

    pub fn in_bounds(&self, c: CellCoord) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn index(&self, c: CellCoord) -> usize {
        c.y * self.width + c.x
    }

    pub fn coord(&self, index: usize) -> CellCoord {
        CellCoord::new(index % self.width, index / self.width)
    }

    /// Weight of a cell; 0 for impassable cells.
    pub fn weight(&self, c: CellCoord) -> f64 {
        self.weight[self.index(c)]
    }

    pub fn is_passable(&self, c: CellCoord) -> bool {
        self.in_bounds(c) && self.passable[self.index(c)]
    }

    pub fn min_passable_weight(&self) -> Option<f64> {
        self.min_weight
    }

    pub fn passable_count(&self) -> usize {
        self.passable.iter().filter(|&&p| p).count()
    }

    /// Whether `u -> v` is a legal single move.
    pub fn move_allowed(&self, u: CellCoord, v: CellCoord) -> bool {
        if !self.is_passable(u) || !self.is_passable(v) {
            return false;
        }
        let (dx, dy) = (u.x.abs_diff(v.x), u.y.abs_diff(v.y));
        match (dx, dy) {
            (0, 1) | (1, 0) => true,
            (1, 1) => {
                self.is_passable(CellCoord::new(v.x, u.y))
                    && self.is_passable(CellCoord::new(u.x, v.y))
            }
            _ => false,
        }
    }

    /// Legal moves out of `c` with their direction index, in scan order.
    pub fn neighbor_moves(&self, c: CellCoord) -> impl Iterator<Item = (usize, CellCoord)> + '_ {
        MOORE_OFFSETS
            .iter()
            .enumerate()
            .filter_map(move |(dir, &(dx, dy))| {
                let n = c.offset(dx, dy)?;
                self.move_allowed(c, n).then_some((dir, n))
            })
    }

    /// Passable neighbors of `c` reachable by a legal move, in scan order.
    pub fn neighbors(&self, c: CellCoord) -> Vec<CellCoord> {
        self.neighbor_moves(c).map(|(_, n)| n).collect()
    }
}

/// How raster samples map to elevations in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ElevationEncoding {
    pub meters_per_level: f64,
    pub offset: f64,
    pub horizontal_resolution: f64,
    pub median_filter: bool,
}

impl Default for ElevationEncoding {
    fn default() -> Self {
        ElevationEncoding {
            meters_per_level: 1.0,
            offset: 0.0,
            horizontal_resolution: 1.0,
            median_filter: false,
        }
    }
}

/// Per-pixel terrain height in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationField {
    width: usize,
    height: usize,
    z: Vec<f64>,
    horizontal_resolution: f64,
}

impl ElevationField {
    pub fn new(
        width: usize,
        height: usize,
        z: Vec<f64>,
        horizontal_resolution: f64,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 || z.len() != width * height {
            return Err(GridError::Parameter(format!(
                "elevation needs {width}x{height} = {} samples, got {}",
                width * height,
                z.len()
            )));
        }
        if !(horizontal_resolution > 0.0 && horizontal_resolution.is_finite()) {
            return Err(GridError::Parameter(format!(
                "horizontal resolution must be > 0, got {horizontal_resolution}"
            )));
        }
        if let Some(i) = z.iter().position(|v| !v.is_finite()) {
            return Err(GridError::Parameter(format!(
                "non-finite elevation at ({}, {})",
                i % width,
                i / width
            )));
        }
        Ok(ElevationField {
            width,
            height,
            z,
            horizontal_resolution,
        })
    }

    pub fn flat(width: usize, height: usize, z: f64) -> Result<Self, GridError> {
        Self::new(width, height, vec![z; width * height], 1.0)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        horizontal_resolution: f64,
        f: impl Fn(CellCoord) -> f64,
    ) -> Result<Self, GridError> {
        let z = (0..width * height)
            .map(|i| f(CellCoord::new(i % width, i / width)))
            .collect();
        Self::new(width, height, z, horizontal_resolution)
    }

    pub fn from_raster(raster: &RasterGrid, enc: ElevationEncoding) -> Result<Self, GridError> {
        let z = raster
            .values()
            .iter()
            .map(|&v| v as f64 * enc.meters_per_level + enc.offset)
            .collect();
        let field = Self::new(raster.width(), raster.height(), z, enc.horizontal_resolution)?;
        Ok(if enc.median_filter {
            field.median_filtered()
        } else {
            field
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.horizontal_resolution
    }

    pub fn z(&self, c: CellCoord) -> f64 {
        self.z[c.y * self.width + c.x]
    }

    /// 3×3 median filter; border windows use their in-bounds cells.
    pub fn median_filtered(&self) -> ElevationField {
        let mut out = Vec::with_capacity(self.z.len());
        let mut window = Vec::with_capacity(9);
        for y in 0..self.height {
            for x in 0..self.width {
                window.clear();
                for ny in y.saturating_sub(1)..=(y + 1).min(self.height - 1) {
                    for nx in x.saturating_sub(1)..=(x + 1).min(self.width - 1) {
                        window.push(self.z[ny * self.width + nx]);
                    }
                }
                window.sort_by(f64::total_cmp);
                let n = window.len();
                let m = if n % 2 == 1 {
                    window[n / 2]
                } else {
                    (window[n / 2 - 1] + window[n / 2]) / 2.0
                };
                out.push(m);
            }
        }
        ElevationField {
            width: self.width,
            height: self.height,
            z: out,
            horizontal_resolution: self.horizontal_resolution,
        }
    }
}

/// Parameters of the terrain edge-cost model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cost3DParams {
    /// Vertical exaggeration applied to elevation differences.
    pub kappa: f64,
    /// Odd window side for [`avg_gradient`].
    pub gradient_window: usize,
    /// Multiplier on the average-gradient penalty; 0 disables it.
    pub gradient_penalty: f64,
    /// Cache per-cell gradients instead of recomputing them on every visit.
    pub memoize_gradient: bool,
}

impl Default for Cost3DParams {
    fn default() -> Self {
        Cost3DParams {
            kappa: 1.0,
            gradient_window: 3,
            gradient_penalty: 0.0,
            memoize_gradient: false,
        }
    }
}

impl Cost3DParams {
    pub fn validate(&self) -> Result<(), GridError> {
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(GridError::Parameter(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.gradient_window == 0 || self.gradient_window.is_multiple_of(2) {
            return Err(GridError::Parameter(format!(
                "gradient_window must be odd and >= 1, got {}",
                self.gradient_window
            )));
        }
        if !(self.gradient_penalty >= 0.0 && self.gradient_penalty.is_finite()) {
            return Err(GridError::Parameter(format!(
                "gradient_penalty must be >= 0, got {}",
                self.gradient_penalty
            )));
        }
        Ok(())
    }
}

fn check_neighbors(grid: &WeightedGrid, u: CellCoord, v: CellCoord) -> Result<(), GridError> {
    for c in [u, v] {
        if !grid.in_bounds(c) {
            return Err(GridError::OutOfBounds(c));
        }
    }
    if grid.move_allowed(u, v) {
        Ok(())
    } else {
        Err(GridError::NotNeighbors { u, v })
    }
}

fn check_dims(grid: &WeightedGrid, elev: &ElevationField) -> Result<(), GridError> {
    if (grid.width, grid.height) != (elev.width, elev.height) {
        return Err(GridError::DimensionMismatch {
            weights: (grid.width, grid.height),
            elevation: (elev.width, elev.height),
        });
    }
    Ok(())
}

fn planar_step_cost(grid: &WeightedGrid, u: CellCoord, v: CellCoord) -> f64 {
    step_length(u, v) * ((grid.weight(u) + grid.weight(v)) / 2.0)
}

fn terrain_step_length(elev: &ElevationField, kappa: f64, u: CellCoord, v: CellCoord) -> f64 {
    let rise = kappa * (elev.z(v) - elev.z(u)) / elev.horizontal_resolution;
    let planar = step_length(u, v);
    if rise == 0.0 {
        planar
    } else {
        (planar * planar + rise * rise).sqrt()
    }
}

/// Cost of the legal move `u -> v` under the planar model.
pub fn edge_cost_2d(grid: &WeightedGrid, u: CellCoord, v: CellCoord) -> Result<f64, GridError> {
    check_neighbors(grid, u, v)?;
    Ok(planar_step_cost(grid, u, v))
}

/// Cost of the legal move `u -> v` under the terrain model.
pub fn edge_cost_3d(
    grid: &WeightedGrid,
    elev: &ElevationField,
    u: CellCoord,
    v: CellCoord,
    p: &Cost3DParams,
) -> Result<f64, GridError> {
    check_dims(grid, elev)?;
    p.validate()?;
    check_neighbors(grid, u, v)?;
    Ok(TerrainCost::new(grid, elev, *p).step_cost(u, v))
}

/// Mean slope magnitude `|Δz| / horizontal distance` between `c` and the
/// in-bounds cells of the `k × k` window around it (center excluded).
pub fn avg_gradient(elev: &ElevationField, c: CellCoord, k: usize) -> f64 {
    let half = (k / 2) as isize;
    if half == 0 {
        return 0.0;
    }
    let zc = elev.z(c);
    let mut sum = 0.0;
    let mut count = 0usize;
    for dy in -half..=half {
        for dx in -half..=half {
            if dx == 0 && dy == 0 {
                continue;
            }
            let Some(n) = c.offset(dx, dy) else { continue };
            if n.x >= elev.width || n.y >= elev.height {
                continue;
            }
            let d = ((dx * dx + dy * dy) as f64).sqrt() * elev.horizontal_resolution;
            sum += (elev.z(n) - zc).abs() / d;
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// An edge-cost metric over a weighted grid.
///
/// `step_cost` is only defined for legal moves (see
/// [`WeightedGrid::move_allowed`]). `straight_distance` is the metric length
/// of the straight line between two cells, which times the minimum passable
/// weight never exceeds the cost of any path between them.
pub trait CostModel {
    fn grid(&self) -> &WeightedGrid;
    fn step_cost(&self, u: CellCoord, v: CellCoord) -> f64;
    fn straight_distance(&self, a: CellCoord, b: CellCoord) -> f64;
}

/// The planar metric: step length × mean endpoint weight.
#[derive(Debug, Clone, Copy)]
pub struct PlanarCost<'a> {
    grid: &'a WeightedGrid,
}

impl<'a> PlanarCost<'a> {
    pub fn new(grid: &'a WeightedGrid) -> Self {
        PlanarCost { grid }
    }
}

impl CostModel for PlanarCost<'_> {
    fn grid(&self) -> &WeightedGrid {
        self.grid
    }

    fn step_cost(&self, u: CellCoord, v: CellCoord) -> f64 {
        planar_step_cost(self.grid, u, v)
    }

    fn straight_distance(&self, a: CellCoord, b: CellCoord) -> f64 {
        let dx = a.x.abs_diff(b.x) as f64;
        let dy = a.y.abs_diff(b.y) as f64;
        (dx * dx + dy * dy).sqrt()
    }
}

/// The terrain metric over a weight grid and a matching elevation field.
#[derive(Debug)]
pub struct TerrainCost<'a> {
    grid: &'a WeightedGrid,
    elev: &'a ElevationField,
    params: Cost3DParams,
    gradient_memo: Option<RefCell<Vec<f64>>>,
}

impl<'a> TerrainCost<'a> {
    /// Callers are responsible for matching dimensions and valid params;
    /// see [`crate::planners3d::Scene3D`].
    pub fn new(grid: &'a WeightedGrid, elev: &'a ElevationField, params: Cost3DParams) -> Self {
        debug_assert_eq!((grid.width, grid.height), (elev.width, elev.height));
        let gradient_memo = (params.memoize_gradient && params.gradient_penalty > 0.0)
            .then(|| RefCell::new(vec![f64::NAN; grid.len()]));
        TerrainCost {
            grid,
            elev,
            params,
            gradient_memo,
        }
    }

    pub fn elevation(&self) -> &ElevationField {
        self.elev
    }

    pub fn params(&self) -> &Cost3DParams {
        &self.params
    }

    fn gradient_factor(&self, v: CellCoord) -> f64 {
        if self.params.gradient_penalty == 0.0 {
            return 1.0;
        }
        let g = match &self.gradient_memo {
            Some(memo) => {
                let i = self.grid.index(v);
                let cached = memo.borrow()[i];
                if cached.is_nan() {
                    let g = avg_gradient(self.elev, v, self.params.gradient_window);
                    memo.borrow_mut()[i] = g;
                    g
                } else {
                    cached
                }
            }
            None => avg_gradient(self.elev, v, self.params.gradient_window),
        };
        1.0 + self.params.gradient_penalty * g
    }
}

impl CostModel for TerrainCost<'_> {
    fn grid(&self) -> &WeightedGrid {
        self.grid
    }

    fn step_cost(&self, u: CellCoord, v: CellCoord) -> f64 {
        terrain_step_length(self.elev, self.params.kappa, u, v)
            * ((self.grid.weight(u) + self.grid.weight(v)) / 2.0)
            * self.gradient_factor(v)
    }

    fn straight_distance(&self, a: CellCoord, b: CellCoord) -> f64 {
        let dx = a.x.abs_diff(b.x) as f64;
        let dy = a.y.abs_diff(b.y) as f64;
        let rise = self.params.kappa * (self.elev.z(b) - self.elev.z(a)) / self.elev.horizontal_resolution;
        (dx * dx + dy * dy + rise * rise).sqrt()
    }
}

/// Cells of the Bresenham line from `a` to `b`, both endpoints included.
///
/// The rasterization is direction-fixed: the cell set from `b` to `a` can
/// differ from the reverse of this one.
pub fn bresenham(a: CellCoord, b: CellCoord) -> Vec<CellCoord> {
    let (mut x, mut y) = (a.x as i64, a.y as i64);
    let (x1, y1) = (b.x as i64, b.y as i64);
    let dx = (x1 - x).abs();
    let dy = -(y1 - y).abs();
    let sx = if x < x1 { 1 } else { -1 };
    let sy = if y < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    let mut cells = Vec::with_capacity((dx.max(-dy) + 1) as usize);
    loop {
        cells.push(CellCoord::new(x as usize, y as usize));
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
    cells
}

/// Result of costing a straight segment.
#[derive(Debug, Clone, PartialEq)]
pub enum Segment {
    Free { cost: f64, cells: Vec<CellCoord> },
    Blocked,
}

impl Segment {
    pub fn cost(&self) -> Option<f64> {
        match self {
            Segment::Free { cost, .. } => Some(*cost),
            Segment::Blocked => None,
        }
    }
}

/// Rasterize `a -> b` and sum the edge costs between consecutive cells.
///
/// The segment is blocked when any cell is impassable or any step is not a
/// legal move (diagonal corner cutting).
pub fn segment_cost<M: CostModel + ?Sized>(model: &M, a: CellCoord, b: CellCoord) -> Segment {
    let grid = model.grid();
    if !grid.is_passable(a) || !grid.is_passable(b) {
        return Segment::Blocked;
    }
    let cells = bresenham(a, b);
    let mut cost = 0.0;
    for pair in cells.windows(2) {
        if !grid.move_allowed(pair[0], pair[1]) {
            return Segment::Blocked;
        }
        cost += model.step_cost(pair[0], pair[1]);
    }
    Segment::Free { cost, cells }
}

/// Sum of edge costs along `cells` under `model`.
pub fn path_cost<M: CostModel + ?Sized>(model: &M, cells: &[CellCoord]) -> Result<f64, GridError> {
    let grid = model.grid();
    let first = *cells.first().ok_or(GridError::EmptyPath)?;
    if !grid.in_bounds(first) {
        return Err(GridError::OutOfBounds(first));
    }
    if !grid.is_passable(first) {
        return Err(GridError::Impassable(first));
    }
    let mut total = 0.0;
    for (i, pair) in cells.windows(2).enumerate() {
        let (from, to) = (pair[0], pair[1]);
        if !grid.in_bounds(to) {
            return Err(GridError::OutOfBounds(to));
        }
        if !grid.move_allowed(from, to) {
            return Err(GridError::BrokenAdjacency { index: i, from, to });
        }
        total += model.step_cost(from, to);
    }
    Ok(total)
}

/// An ordered sequence of neighboring cells with its accumulated cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub cells: Vec<CellCoord>,
    pub total_cost: f64,
}

impl Path {
    /// Build a path, costing it under `model`.
    pub fn from_cells<M: CostModel + ?Sized>(
        model: &M,
        cells: Vec<CellCoord>,
    ) -> Result<Path, GridError> {
        let total_cost = path_cost(model, &cells)?;
        Ok(Path { cells, total_cost })
    }

    pub fn trivial(c: CellCoord) -> Path {
        Path {
            cells: vec![c],
            total_cost: 0.0,
        }
    }

    pub fn start(&self) -> Option<CellCoord> {
        self.cells.first().copied()
    }

    pub fn end(&self) -> Option<CellCoord> {
        self.cells.last().copied()
    }

    /// Check adjacency, passability and that the stored cost matches a
    /// recomputation within 1e-9 relative.
    pub fn validate<M: CostModel + ?Sized>(&self, model: &M) -> Result<(), GridError> {
        let recomputed = path_cost(model, &self.cells)?;
        if !costs_match(self.total_cost, recomputed) {
            return Err(GridError::CostMismatch {
                stored: self.total_cost,
                recomputed,
            });
        }
        Ok(())
    }
}

/// Relative comparison used for path costs summed in different orders.
pub fn costs_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}
