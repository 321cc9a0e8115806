//! Minimum spanning forest by sparsifying the graph window by window.
//!
//! Edges with an update inside a window are *changing*; edges present through
//! the whole window are *fixed*. With every changing edge forced in first, a
//! fixed edge Kruskal still picks belongs to the forest whatever the changing
//! edges do, so it is contracted. A fixed edge that closes a cycle among fixed
//! edges alone can never be in the forest, so it is dropped. What survives is
//! passed to the children. Edge order is (weight, element id), which makes the
//! forest unique.

use std::collections::HashSet;
use std::fmt;

use super::{ceil_log2, Oracle};
use crate::engine::{DncProblem, ItemId, ItemStatus, WindowInput};
use crate::error::Error;
use crate::model::{Day, ElementId, GroundSet, Payload};

#[derive(Clone, Copy, Debug)]
pub struct Msf {
    pub vertices: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Candidate {
    item: ItemId,
    element: ElementId,
    u: u32,
    v: u32,
    w: i64,
}

impl Candidate {
    fn key(&self) -> (i64, ElementId, ItemId) {
        (self.w, self.element, self.item)
    }
}

#[derive(Clone, Debug)]
pub struct MsfMemory {
    contracted: Vec<u32>,
    weight: i64,
    forest: Vec<ElementId>,
    edges: Vec<Candidate>,
}

impl MsfMemory {
    /// Edges still passed down, as element ids.
    pub fn open_edges(&self) -> Vec<ElementId> {
        self.edges.iter().map(|c| c.element).collect()
    }

    pub fn contracted_weight(&self) -> i64 {
        self.weight
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Forest {
    pub weight: i64,
    pub edges: Vec<ElementId>,
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.edges.iter().map(ElementId::to_string).collect();
        write!(f, "{} {}", self.weight, if ids.is_empty() { "-".to_string() } else { ids.join(",") })
    }
}

fn find(p: &mut [u32], mut x: u32) -> u32 {
    while p[x as usize] != x {
        let next = p[x as usize];
        p[x as usize] = p[next as usize];
        x = next;
    }
    x
}

fn unite(p: &mut [u32], a: u32, b: u32) -> bool {
    let (ra, rb) = (find(p, a), find(p, b));
    if ra == rb {
        return false;
    }
    let (lo, hi) = (ra.min(rb), ra.max(rb));
    p[hi as usize] = lo;
    true
}

impl Msf {
    fn candidate(&self, item: ItemId, element: ElementId, ground: &GroundSet) -> Result<Option<Candidate>, Error> {
        match ground.payload(element) {
            None => Ok(None),
            Some(&Payload::Edge { u, v, w }) if u < self.vertices && v < self.vertices => {
                Ok(Some(Candidate { item, element, u, v, w }))
            }
            Some(_) => Err(Error::Contract(format!("element {element} is not a valid edge"))),
        }
    }
}

impl DncProblem for Msf {
    type Memory = MsfMemory;
    type Output = Forest;

    fn root_memory(&self) -> MsfMemory {
        MsfMemory { contracted: (0..self.vertices).collect(), weight: 0, forest: Vec::new(), edges: Vec::new() }
    }

    fn memory_units(&self, m: &MsfMemory) -> u64 {
        u64::from(self.vertices) + m.forest.len() as u64 + m.edges.len() as u64
    }

    fn compute_window(&self, input: &WindowInput<'_>, m: &mut MsfMemory) -> Result<u64, Error> {
        let mut cands = std::mem::take(&mut m.edges);
        let known: HashSet<ItemId> = cands.iter().map(|c| c.item).collect();
        for s in input.own_items() {
            if !known.contains(&s.item) {
                if let Some(c) = self.candidate(s.item, s.element, input.ground)? {
                    cands.push(c);
                }
            }
        }
        let examined = cands.len() as u64;

        let mut changing = Vec::new();
        let mut fixed = Vec::new();
        for c in cands {
            match input.status(c.item) {
                ItemStatus::Changing => changing.push(c),
                ItemStatus::Throughout => fixed.push(c),
                ItemStatus::Absent => {}
            }
        }
        fixed.sort_by_key(Candidate::key);

        // Contraction: changing edges first, then fixed edges in order.
        let n = self.vertices as usize;
        let mut scratch: Vec<u32> = (0..n as u32).collect();
        for c in &changing {
            let (a, b) = (find(&mut m.contracted, c.u), find(&mut m.contracted, c.v));
            unite(&mut scratch, a, b);
        }
        let mut picked = Vec::new();
        let mut rest = Vec::new();
        for c in fixed {
            let (a, b) = (find(&mut m.contracted, c.u), find(&mut m.contracted, c.v));
            if a == b {
                continue;
            }
            if unite(&mut scratch, a, b) {
                picked.push(c);
            } else {
                rest.push(c);
            }
        }
        for c in &picked {
            unite(&mut m.contracted, c.u, c.v);
            m.weight += c.w;
            m.forest.push(c.element);
        }

        // Deletion: among the remaining fixed edges keep only a forest.
        let mut scratch: Vec<u32> = (0..n as u32).collect();
        let mut kept = Vec::new();
        for c in rest {
            let (a, b) = (find(&mut m.contracted, c.u), find(&mut m.contracted, c.v));
            if unite(&mut scratch, a, b) {
                kept.push(c);
            }
        }
        changing.extend(kept);
        m.edges = changing;
        Ok(examined * (ceil_log2(examined + 1) + 1) + u64::from(self.vertices))
    }

    fn output(&self, leaf: &MsfMemory, _: Day) -> Forest {
        let mut edges = leaf.forest.clone();
        edges.sort_unstable();
        edges.dedup();
        Forest { weight: leaf.weight, edges }
    }
}

/// Kruskal over the present edges in (weight, id) order.
pub fn kruskal(vertices: u32, present: &[ElementId], ground: &GroundSet) -> Forest {
    let mut es: Vec<(i64, ElementId, u32, u32)> = present
        .iter()
        .filter_map(|&e| match ground.payload(e) {
            Some(&Payload::Edge { u, v, w }) => Some((w, e, u, v)),
            _ => None,
        })
        .collect();
    es.sort_unstable();
    es.dedup_by_key(|x| x.1);
    let mut p: Vec<u32> = (0..vertices).collect();
    let mut weight = 0;
    let mut edges = Vec::new();
    for (w, e, u, v) in es {
        if unite(&mut p, u, v) {
            weight += w;
            edges.push(e);
        }
    }
    edges.sort_unstable();
    Forest { weight, edges }
}

impl Oracle for Msf {
    type Output = Forest;

    fn evaluate(&self, present: &[ElementId], ground: &GroundSet) -> (Forest, u64) {
        let n = present.len() as u64;
        (kruskal(self.vertices, present, ground), n * (ceil_log2(n + 1) + 1) + u64::from(self.vertices))
    }
}
