//! Sampling-tree storage shared by RRT* and RRT-Connect.
//!
//! Nodes live in insertion order; node ids double as the tie-break for
//! nearest-neighbor queries. A coarse bucket grid answers nearest and radius
//! queries without scanning the whole tree.

use std::collections::HashMap;
use std::mem::size_of;

use crate::grid_model::{bresenham, CellCoord, WeightedGrid};
use crate::planning::MemoryMeter;

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct TreeNode {
    cell: u32,
    parent: u32,
    cost: f64,
    first_child: u32,
    next_sibling: u32,
}

/// Accounted bytes per tree node: the node record, its cell-membership entry
/// and its spatial-index entry.
pub const TREE_NODE_BYTES: u64 =
    (size_of::<TreeNode>() + size_of::<(u32, u32)>() + size_of::<u32>()) as u64;

#[derive(Debug)]
pub(crate) struct Tree {
    width: usize,
    height: usize,
    bucket: usize,
    nodes: Vec<TreeNode>,
    members: HashMap<u32, u32>,
    buckets: HashMap<(u32, u32), Vec<u32>>,
}

impl Tree {
    pub fn new(grid: &WeightedGrid, root: CellCoord, bucket: usize, meter: &mut MemoryMeter) -> Tree {
        let mut tree = Tree {
            width: grid.width(),
            height: grid.height(),
            bucket: bucket.max(1),
            nodes: Vec::new(),
            members: HashMap::new(),
            buckets: HashMap::new(),
        };
        tree.insert(root, NONE, 0.0, meter);
        tree
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn cell(&self, id: u32) -> CellCoord {
        let i = self.nodes[id as usize].cell as usize;
        CellCoord::new(i % self.width, i / self.width)
    }

    pub fn cost(&self, id: u32) -> f64 {
        self.nodes[id as usize].cost
    }

    #[cfg(test)]
    pub fn parent(&self, id: u32) -> Option<u32> {
        let p = self.nodes[id as usize].parent;
        (p != NONE).then_some(p)
    }

    pub fn find(&self, c: CellCoord) -> Option<u32> {
        self.members.get(&((c.y * self.width + c.x) as u32)).copied()
    }

    fn bucket_of(&self, c: CellCoord) -> (u32, u32) {
        ((c.x / self.bucket) as u32, (c.y / self.bucket) as u32)
    }

    pub fn insert(&mut self, c: CellCoord, parent: u32, cost: f64, meter: &mut MemoryMeter) -> u32 {
        let id = self.nodes.len() as u32;
        let cell = (c.y * self.width + c.x) as u32;
        let mut node = TreeNode {
            cell,
            parent,
            cost,
            first_child: NONE,
            next_sibling: NONE,
        };
        if parent != NONE {
            node.next_sibling = self.nodes[parent as usize].first_child;
            self.nodes[parent as usize].first_child = id;
        }
        self.nodes.push(node);
        self.members.insert(cell, id);
        self.buckets.entry(self.bucket_of(c)).or_default().push(id);
        meter.alloc(TREE_NODE_BYTES);
        id
    }

    /// Closest node by Euclidean distance; ties go to the earliest insertion.
    pub fn nearest(&self, target: CellCoord) -> u32 {
        let (tbx, tby) = self.bucket_of(target);
        let max_ring = (self.width.max(self.height) / self.bucket + 1) as i64;
        let mut best: Option<(u64, u32)> = None;
        for ring in 0..=max_ring {
            for (bx, by) in ring_buckets(tbx as i64, tby as i64, ring) {
                if let Some(ids) = self.buckets.get(&(bx, by)) {
                    for &id in ids {
                        let key = (self.cell(id).dist_sq(target), id);
                        if best.is_none_or(|b| key < b) {
                            best = Some(key);
                        }
                    }
                }
            }
            // every cell in ring + 1 or beyond is at least ring*bucket + 1 away
            if let Some((d2, _)) = best {
                let bound = (ring as u64) * self.bucket as u64 + 1;
                if d2 < bound * bound {
                    break;
                }
            }
        }
        best.expect("tree always has a root").1
    }

    /// Ids of nodes within `radius` of `target`, ascending.
    pub fn within(&self, target: CellCoord, radius: f64) -> Vec<u32> {
        let r2 = radius * radius;
        let (tbx, tby) = self.bucket_of(target);
        let rings = (radius / self.bucket as f64).ceil() as i64 + 1;
        let mut out = Vec::new();
        for ring in 0..=rings {
            for (bx, by) in ring_buckets(tbx as i64, tby as i64, ring) {
                if let Some(ids) = self.buckets.get(&(bx, by)) {
                    out.extend(
                        ids.iter()
                            .copied()
                            .filter(|&id| self.cell(id).dist_sq(target) as f64 <= r2),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Attach `child` to `new_parent` with cost `new_cost` and shift the cost
    /// of every descendant by the same amount.
    pub fn reparent(&mut self, child: u32, new_parent: u32, new_cost: f64) {
        let old_parent = self.nodes[child as usize].parent;
        if old_parent != NONE {
            let mut prev = NONE;
            let mut cur = self.nodes[old_parent as usize].first_child;
            while cur != NONE && cur != child {
                prev = cur;
                cur = self.nodes[cur as usize].next_sibling;
            }
            let next = self.nodes[child as usize].next_sibling;
            if prev == NONE {
                self.nodes[old_parent as usize].first_child = next;
            } else {
                self.nodes[prev as usize].next_sibling = next;
            }
        }
        self.nodes[child as usize].parent = new_parent;
        self.nodes[child as usize].next_sibling = self.nodes[new_parent as usize].first_child;
        self.nodes[new_parent as usize].first_child = child;

        let delta = new_cost - self.nodes[child as usize].cost;
        self.nodes[child as usize].cost = new_cost;
        let mut stack = vec![self.nodes[child as usize].first_child];
        while let Some(mut cur) = stack.pop() {
            while cur != NONE {
                self.nodes[cur as usize].cost += delta;
                stack.push(self.nodes[cur as usize].first_child);
                cur = self.nodes[cur as usize].next_sibling;
            }
        }
    }

    /// Node cells from the root down to `id`.
    pub fn branch(&self, id: u32) -> Vec<CellCoord> {
        let mut cells = vec![self.cell(id)];
        let mut cur = self.nodes[id as usize].parent;
        while cur != NONE {
            cells.push(self.cell(cur));
            cur = self.nodes[cur as usize].parent;
        }
        cells.reverse();
        cells
    }
}

/// Buckets on the Chebyshev ring of radius `ring` around `(cx, cy)`.
fn ring_buckets(cx: i64, cy: i64, ring: i64) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut push = |x: i64, y: i64| {
        if x >= 0 && y >= 0 {
            out.push((x as u32, y as u32));
        }
    };
    if ring == 0 {
        push(cx, cy);
        return out;
    }
    for dx in -ring..=ring {
        push(cx + dx, cy - ring);
        push(cx + dx, cy + ring);
    }
    for dy in (1 - ring)..ring {
        push(cx - ring, cy + dy);
        push(cx + ring, cy + dy);
    }
    out
}

/// Expand a waypoint chain into lattice cells, rasterizing each hop from
/// the earlier waypoint to the later one.
pub(crate) fn densify(waypoints: &[CellCoord]) -> Vec<CellCoord> {
    let mut cells = vec![waypoints[0]];
    for pair in waypoints.windows(2) {
        cells.extend(bresenham(pair[0], pair[1]).into_iter().skip(1));
    }
    cells
}
