//! Incremental connectivity with union by rank and no path compression, so
//! every insertion costs O(log n) in the worst case rather than amortized.

use std::collections::VecDeque;
use std::fmt;

use super::{ceil_log2, Oracle};
use crate::error::Error;
use crate::incremental::IncrementalContract;
use crate::model::{Day, ElementId, GroundSet, Payload};

#[derive(Clone, Copy, Debug)]
pub struct Connectivity {
    pub vertices: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankForest {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl RankForest {
    pub fn new(n: u32) -> RankForest {
        RankForest { parent: (0..n).collect(), rank: vec![0; n as usize] }
    }

    /// Root and number of links followed.
    pub fn find(&self, mut x: u32) -> (u32, u64) {
        let mut steps = 0;
        while self.parent[x as usize] != x {
            x = self.parent[x as usize];
            steps += 1;
        }
        (x, steps)
    }

    pub fn connected(&self, u: u32, v: u32) -> bool {
        self.find(u).0 == self.find(v).0
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }
}

/// Component label of every vertex: the smallest vertex in its component.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components(pub Vec<u32>);

impl fmt::Display for Components {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u32::to_string).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn edge(vertices: u32, element: ElementId, payload: Option<&Payload>) -> Result<Option<(u32, u32)>, Error> {
    match payload {
        // Only predicted, never seen: it cannot reach a day's answer.
        None => Ok(None),
        Some(&Payload::Edge { u, v, .. }) if u < vertices && v < vertices => Ok(Some((u, v))),
        Some(Payload::Edge { .. }) => Err(Error::Contract(format!("edge {element} has an endpoint out of range"))),
        _ => Err(Error::Contract(format!("element {element} carries no edge"))),
    }
}

impl IncrementalContract for Connectivity {
    type State = RankForest;
    type Output = Components;

    fn init(&self) -> RankForest {
        RankForest::new(self.vertices)
    }

    fn insert(&self, s: &mut RankForest, element: ElementId, payload: Option<&Payload>) -> Result<u64, Error> {
        let Some((u, v)) = edge(self.vertices, element, payload)? else {
            return Ok(1);
        };
        let ((ru, su), (rv, sv)) = (s.find(u), s.find(v));
        if ru != rv {
            let (big, small) = if s.rank[ru as usize] >= s.rank[rv as usize] { (ru, rv) } else { (rv, ru) };
            s.parent[small as usize] = big;
            if s.rank[big as usize] == s.rank[small as usize] {
                s.rank[big as usize] += 1;
            }
        }
        Ok(su + sv + 1)
    }

    fn state_units(&self, _: &RankForest) -> u64 {
        u64::from(self.vertices)
    }

    fn update_bound(&self) -> u64 {
        2 * ceil_log2(u64::from(self.vertices)) + 1
    }

    fn output(&self, s: &RankForest, _: Day) -> Components {
        let mut low = vec![u32::MAX; s.len()];
        let roots: Vec<u32> = (0..s.len() as u32).map(|x| s.find(x).0).collect();
        for (x, &r) in roots.iter().enumerate() {
            low[r as usize] = low[r as usize].min(x as u32);
        }
        Components(roots.iter().map(|&r| low[r as usize]).collect())
    }
}

impl Oracle for Connectivity {
    type Output = Components;

    fn evaluate(&self, present: &[ElementId], ground: &GroundSet) -> (Components, u64) {
        let n = self.vertices as usize;
        let mut adj = vec![Vec::new(); n];
        for &e in present {
            if let Some(&Payload::Edge { u, v, .. }) = ground.payload(e) {
                adj[u as usize].push(v);
                adj[v as usize].push(u);
            }
        }
        let mut label = vec![u32::MAX; n];
        for s in 0..n {
            if label[s] != u32::MAX {
                continue;
            }
            label[s] = s as u32;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &y in &adj[x] {
                    if label[y as usize] == u32::MAX {
                        label[y as usize] = s as u32;
                        q.push_back(y as usize);
                    }
                }
            }
        }
        (Components(label), (n + 2 * present.len()) as u64)
    }
}
