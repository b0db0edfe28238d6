//! Grid path planning on weighted road maps and elevation models, with a
//! benchmark harness that compares planners on cost, time and accounted
//! memory.

pub mod bench;
pub mod cli;
pub mod grid_model;
pub mod oracle;
pub mod planner;
pub mod planners2d;
pub mod planners3d;
pub mod planning;
pub mod raster_io;
pub mod synth;

pub use grid_model::{CellCoord, CostModel, Path, WeightedGrid};
pub use planning::{PlanError, PlanOutcome, PlanStats};
