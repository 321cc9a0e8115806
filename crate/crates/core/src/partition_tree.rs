//! Random hierarchy of windows over days `1..=T`.
//!
//! Every divider `d` (between day `d` and day `d + 1`) draws a uniform rank.
//! A window splits at its lowest-ranked interior divider, so the tree is the
//! min-Cartesian tree of the divider ranks. Ties go to the smaller divider.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::model::Day;

pub type WindowId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub start: Day,
    pub end: Day,
    pub parent: Option<WindowId>,
    pub children: Option<[WindowId; 2]>,
    pub depth: u32,
}

impl Window {
    pub fn len(&self) -> u32 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn contains(&self, day: Day) -> bool {
        self.start <= day && day <= self.end
    }
}

#[derive(Clone, Debug)]
pub struct PartitionTree {
    horizon: u32,
    windows: Vec<Window>,
    leaf_of: Vec<WindowId>,
    ranks: Vec<f64>,
    depth: u32,
}

fn lower(ranks: &[f64], a: usize, b: usize) -> bool {
    (ranks[a], a) < (ranks[b], b)
}

impl PartitionTree {
    pub fn build(horizon: u32, seed: u64) -> Result<PartitionTree, Error> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ranks = (1..horizon).map(|_| rng.gen::<f64>()).collect();
        PartitionTree::from_ranks(horizon, ranks)
    }

    /// Builds from explicit ranks; `ranks[d - 1]` belongs to divider `d`.
    pub fn from_ranks(horizon: u32, ranks: Vec<f64>) -> Result<PartitionTree, Error> {
        if horizon == 0 {
            return Err(Error::InvalidParameters("horizon must be at least 1".into()));
        }
        if ranks.len() != horizon as usize - 1 {
            return Err(Error::InvalidParameters(format!(
                "{} ranks given for {} dividers",
                ranks.len(),
                horizon - 1
            )));
        }
        // Cartesian tree over divider indices 0..T-1 with a monotone stack.
        let m = ranks.len();
        let mut left = vec![usize::MAX; m];
        let mut right = vec![usize::MAX; m];
        let mut stack: Vec<usize> = Vec::new();
        for (i, slot) in left.iter_mut().enumerate() {
            let mut last = usize::MAX;
            while let Some(&top) = stack.last() {
                if lower(&ranks, i, top) {
                    last = stack.pop().unwrap();
                } else {
                    break;
                }
            }
            *slot = last;
            if let Some(&top) = stack.last() {
                right[top] = i;
            }
            stack.push(i);
        }
        let root_div = stack.first().copied();

        let mut windows = Vec::with_capacity(2 * horizon as usize - 1);
        let mut leaf_of = vec![0; horizon as usize + 1];
        let mut depth = 0;
        // (divider or MAX for a leaf, start, end, parent, depth)
        let mut todo = vec![(root_div.unwrap_or(usize::MAX), 1u32, horizon, None::<WindowId>, 0u32)];
        while let Some((div, start, end, parent, d)) = todo.pop() {
            let id = windows.len() as WindowId;
            windows.push(Window { start, end, parent, children: None, depth: d });
            depth = depth.max(d);
            if let Some(p) = parent {
                let w = &mut windows[p as usize];
                match &mut w.children {
                    None => w.children = Some([id, WindowId::MAX]),
                    Some(c) => c[1] = id,
                }
            }
            if start == end {
                leaf_of[start as usize] = id;
                continue;
            }
            let split = div as u32 + 1;
            // Left child is pushed last so it is created first.
            todo.push((right[div], split + 1, end, Some(id), d + 1));
            todo.push((left[div], start, split, Some(id), d + 1));
        }
        Ok(PartitionTree { horizon, windows, leaf_of, ranks, depth })
    }

    /// Deterministic near-balanced tree for tests.
    pub fn balanced(horizon: u32) -> Result<PartitionTree, Error> {
        let ranks = (1..horizon).map(|d| 1.0 / f64::from(d.trailing_zeros() + 1)).collect();
        PartitionTree::from_ranks(horizon, ranks)
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn root(&self) -> WindowId {
        0
    }

    pub fn window(&self, id: WindowId) -> &Window {
        &self.windows[id as usize]
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn ranks(&self) -> &[f64] {
        &self.ranks
    }

    pub fn leaf(&self, day: Day) -> WindowId {
        self.leaf_of[day as usize]
    }

    pub fn sibling(&self, id: WindowId) -> Option<WindowId> {
        let p = self.window(id).parent?;
        let [a, b] = self.window(p).children?;
        Some(if a == id { b } else { a })
    }

    /// Day after which the window splits.
    pub fn split_day(&self, id: WindowId) -> Option<Day> {
        let [a, _] = self.window(id).children?;
        Some(self.window(a).end)
    }

    /// Smallest window containing both days, found by walking up from a leaf.
    pub fn smallest_window(&self, t1: Day, t2: Day) -> Result<WindowId, Error> {
        for t in [t1, t2] {
            if t < 1 || t > self.horizon {
                return Err(Error::OutOfRange(format!("day {t} outside 1..={}", self.horizon)));
            }
        }
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let mut w = self.leaf(lo);
        while !self.window(w).contains(hi) {
            w = self.window(w).parent.expect("root spans the horizon");
        }
        Ok(w)
    }

    /// Windows from the root down to the leaf of `day`.
    pub fn path_to_leaf(&self, day: Day) -> Vec<WindowId> {
        let mut path = vec![self.leaf(day)];
        while let Some(p) = self.window(*path.last().unwrap()).parent {
            path.push(p);
        }
        path.reverse();
        path
    }

    /// True when `[a, b]` is a window: the dividers bordering it rank below
    /// every divider strictly inside it (the horizon ends count as rank 0).
    pub fn is_window(&self, a: Day, b: Day) -> bool {
        if a < 1 || b > self.horizon || a > b {
            return false;
        }
        let border = |d: u32| -> Option<(f64, usize)> {
            (d >= 1 && d < self.horizon).then(|| (self.ranks[d as usize - 1], d as usize - 1))
        };
        let edges = [border(a - 1), border(b)];
        (a..b).all(|d| {
            let inner = (self.ranks[d as usize - 1], d as usize - 1);
            edges.iter().all(|e| e.is_none_or(|e| e < inner))
        })
    }

    /// Indented listing of the windows, one per line.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let mut todo = vec![self.root()];
        while let Some(id) = todo.pop() {
            let w = self.window(id);
            let _ = writeln!(out, "{}[{}, {}]", "  ".repeat(w.depth as usize), w.start, w.end);
            if let Some([a, b]) = w.children {
                todo.push(b);
                todo.push(a);
            }
        }
        out
    }
}
