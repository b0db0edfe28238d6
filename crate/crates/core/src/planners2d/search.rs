//! Best-first label-setting search shared by Dijkstra and A*.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::mem::size_of;

use crate::grid_model::{CellCoord, CostModel, Path};
use crate::planning::{check_endpoints, MemoryMeter, PlanError, PlanOutcome, PlanStats};

const NO_PARENT: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Label {
    g: f64,
    parent: u32,
    closed: bool,
}

/// Open-list entry; `index` is the row-major cell index, so ordering by
/// `(f, index)` is ordering by `(f, y, x)`.
#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    index: u32,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.index.cmp(&self.index))
    }
}

/// Accounted bytes of one cell label (key + value).
pub const LABEL_BYTES: u64 = size_of::<(u32, Label)>() as u64;
/// Accounted bytes of one open-list entry.
pub const OPEN_ENTRY_BYTES: u64 = size_of::<OpenEntry>() as u64;
/// Accounted bytes of a Dijkstra/A* run whose start equals its goal.
pub const SEARCH_START_BYTES: u64 = LABEL_BYTES + OPEN_ENTRY_BYTES;

/// `heuristic` must be non-negative; it is consistent for the meaningful
/// configurations (zero, or straight distance × minimum weight).
pub(crate) fn best_first<M, H>(
    model: &M,
    start: CellCoord,
    goal: CellCoord,
    heuristic: H,
) -> Result<PlanOutcome, PlanError>
where
    M: CostModel + ?Sized,
    H: Fn(CellCoord) -> f64,
{
    let grid = model.grid();
    check_endpoints(grid, start, goal)?;

    let mut meter = MemoryMeter::new();
    let mut labels: HashMap<u32, Label> = HashMap::new();
    let mut open = BinaryHeap::new();
    let mut expanded = 0u64;

    let start_idx = grid.index(start) as u32;
    let goal_idx = grid.index(goal) as u32;
    labels.insert(
        start_idx,
        Label {
            g: 0.0,
            parent: NO_PARENT,
            closed: false,
        },
    );
    meter.alloc(LABEL_BYTES);
    open.push(OpenEntry {
        f: heuristic(start),
        index: start_idx,
    });
    meter.alloc(OPEN_ENTRY_BYTES);

    let mut found = false;
    while let Some(OpenEntry { index, .. }) = open.pop() {
        meter.free(OPEN_ENTRY_BYTES);
        let label = labels.get_mut(&index).expect("queued cells are labelled");
        if label.closed {
            continue;
        }
        label.closed = true;
        let g = label.g;
        expanded += 1;
        if index == goal_idx {
            found = true;
            break;
        }
        let u = grid.coord(index as usize);
        for (_, v) in grid.neighbor_moves(u) {
            let vi = grid.index(v) as u32;
            let candidate = g + model.step_cost(u, v);
            let improved = match labels.get_mut(&vi) {
                Some(l) if l.closed => false,
                Some(l) => {
                    if candidate < l.g {
                        l.g = candidate;
                        l.parent = index;
                        true
                    } else {
                        false
                    }
                }
                None => {
                    labels.insert(
                        vi,
                        Label {
                            g: candidate,
                            parent: index,
                            closed: false,
                        },
                    );
                    meter.alloc(LABEL_BYTES);
                    true
                }
            };
            if improved {
                open.push(OpenEntry {
                    f: candidate + heuristic(v),
                    index: vi,
                });
                meter.alloc(OPEN_ENTRY_BYTES);
            }
        }
    }

    let path = if found {
        let mut cells = vec![goal];
        let mut cur = labels[&goal_idx].parent;
        while cur != NO_PARENT {
            cells.push(grid.coord(cur as usize));
            cur = labels[&cur].parent;
        }
        cells.reverse();
        Some(Path::from_cells(model, cells)?)
    } else {
        None
    };
    Ok(PlanOutcome {
        stats: PlanStats {
            expanded,
            iterations: 0,
            peak_memory: meter.peak(),
            best_cost_trace: path.iter().map(|p| (0, p.total_cost)).collect(),
        },
        path,
    })
}
