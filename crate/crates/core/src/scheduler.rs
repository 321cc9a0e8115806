//! Matching predicted events to days so that each day carries at most one
//! insertion and at most one deletion.
//!
//! [`SlotLine`] keeps the taken days as maximal runs in a union-find; every run
//! knows its leftmost and rightmost day, so the nearest free day on either side
//! of a taken day is found with a single `find`.

use std::collections::{BTreeMap, BinaryHeap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, FeasibilityViolation};
use crate::model::{Day, ElementId, EventKind, PredictedDay, Prediction};

#[derive(Clone, Debug)]
pub struct SlotLine {
    horizon: u32,
    parent: Vec<u32>,
    rank: Vec<u8>,
    lo: Vec<u32>,
    hi: Vec<u32>,
    taken: Vec<bool>,
    ops: u64,
}

impl SlotLine {
    pub fn new(horizon: u32) -> SlotLine {
        let n = horizon as usize + 2;
        SlotLine {
            horizon,
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            lo: (0..n as u32).collect(),
            hi: (0..n as u32).collect(),
            taken: vec![false; n],
            ops: 0,
        }
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn overflow(&self) -> Day {
        self.horizon + 1
    }

    /// Number of top-level find and union operations so far.
    pub fn union_find_ops(&self) -> u64 {
        self.ops
    }

    pub fn is_free(&self, day: Day) -> bool {
        (1..=self.horizon).contains(&day) && !self.taken[day as usize]
    }

    fn root(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    fn find(&mut self, x: u32) -> u32 {
        self.ops += 1;
        self.root(x)
    }

    fn union(&mut self, a: u32, b: u32) {
        self.ops += 1;
        let (ra, rb) = (self.root(a), self.root(b));
        if ra == rb {
            return;
        }
        let (big, small) = if self.rank[ra as usize] >= self.rank[rb as usize] { (ra, rb) } else { (rb, ra) };
        self.parent[small as usize] = big;
        if self.rank[big as usize] == self.rank[small as usize] {
            self.rank[big as usize] += 1;
        }
        self.lo[big as usize] = self.lo[big as usize].min(self.lo[small as usize]);
        self.hi[big as usize] = self.hi[big as usize].max(self.hi[small as usize]);
    }

    /// Marks a free day as taken and merges it with taken neighbours.
    pub fn take(&mut self, day: Day) {
        debug_assert!(self.is_free(day));
        self.taken[day as usize] = true;
        if self.taken[day as usize - 1] {
            self.union(day - 1, day);
        }
        if self.taken[day as usize + 1] {
            self.union(day, day + 1);
        }
    }

    /// Takes a day if it is still free; used to retire days that have passed.
    pub fn occupy(&mut self, day: Day) {
        if self.is_free(day) {
            self.take(day);
        }
    }

    /// Nearest free day strictly left and strictly right of a taken day.
    fn neighbours(&mut self, day: Day) -> (Option<Day>, Option<Day>) {
        let r = self.find(day);
        let l = self.lo[r as usize] - 1;
        let h = self.hi[r as usize] + 1;
        ((l >= 1).then_some(l), (h <= self.horizon).then_some(h))
    }

    /// Randomised harmonic rule: take the predicted day when free, otherwise
    /// go to the nearer free neighbour with probability inversely
    /// proportional to its distance.
    pub fn assign_harmonic<R: Rng>(&mut self, day: Day, rng: &mut R) -> Day {
        if day < 1 || day > self.horizon {
            return self.overflow();
        }
        if self.is_free(day) {
            self.take(day);
            return day;
        }
        let chosen = match self.neighbours(day) {
            (Some(l), Some(r)) => {
                let (dl, dr) = (f64::from(day - l), f64::from(r - day));
                if rng.gen::<f64>() < dr / (dl + dr) {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => return self.overflow(),
        };
        self.take(chosen);
        chosen
    }

    /// Nearest free day, ties going to the earlier one.
    pub fn assign_greedy(&mut self, day: Day) -> Day {
        if day < 1 || day > self.horizon {
            return self.overflow();
        }
        if self.is_free(day) {
            self.take(day);
            return day;
        }
        let chosen = match self.neighbours(day) {
            (Some(l), Some(r)) => {
                if day - l <= r - day {
                    l
                } else {
                    r
                }
            }
            (Some(l), None) => l,
            (None, Some(r)) => r,
            (None, None) => return self.overflow(),
        };
        self.take(chosen);
        chosen
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignedEvent {
    pub element: ElementId,
    pub kind: EventKind,
    pub predicted: PredictedDay,
    pub day: Day,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub horizon: u32,
    pub events: Vec<AssignedEvent>,
}

impl Assignment {
    pub fn overflow(&self) -> Day {
        self.horizon + 1
    }

    pub fn as_predictions(&self) -> Vec<Prediction> {
        self.events
            .iter()
            .map(|a| Prediction {
                element: a.element,
                kind: a.kind,
                day: if a.day > self.horizon { PredictedDay::EndOfHorizon } else { PredictedDay::Day(a.day) },
                reschedule_count: 0,
            })
            .collect()
    }

    /// Sum over events of the distance between assigned and predicted day.
    pub fn displacement(&self) -> u64 {
        self.events
            .iter()
            .map(|a| u64::from(a.day.abs_diff(a.predicted.resolve(self.horizon))))
            .sum()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScheduleStats {
    pub union_find_ops: u64,
    pub overflowed: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchedulerKind {
    Harmonic,
    Greedy,
}

fn run_line(
    predictions: &[Prediction],
    horizon: u32,
    mut pick: impl FnMut(&mut SlotLine, Day) -> Day,
) -> Result<(Assignment, ScheduleStats), Error> {
    if horizon == 0 {
        return Err(Error::InvalidParameters("horizon must be at least 1".into()));
    }
    let mut line = SlotLine::new(horizon);
    let mut events = Vec::with_capacity(predictions.len());
    for p in predictions {
        let day = pick(&mut line, p.day.resolve(horizon));
        events.push(AssignedEvent { element: p.element, kind: p.kind, predicted: p.day, day });
    }
    let overflowed = events.iter().filter(|a| a.day > horizon).count();
    Ok((Assignment { horizon, events }, ScheduleStats { union_find_ops: line.union_find_ops(), overflowed }))
}

/// Assigns predictions in the given order with the harmonic rule.
pub fn harmonic_assign(
    predictions: &[Prediction],
    horizon: u32,
    seed: u64,
) -> Result<(Assignment, ScheduleStats), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    run_line(predictions, horizon, |line, d| line.assign_harmonic(d, &mut rng))
}

pub fn greedy_assign(predictions: &[Prediction], horizon: u32) -> Result<(Assignment, ScheduleStats), Error> {
    run_line(predictions, horizon, |line, d| line.assign_greedy(d))
}

pub fn assign(
    kind: SchedulerKind,
    predictions: &[Prediction],
    horizon: u32,
    seed: u64,
) -> Result<(Assignment, ScheduleStats), Error> {
    match kind {
        SchedulerKind::Harmonic => harmonic_assign(predictions, horizon, seed),
        SchedulerKind::Greedy => greedy_assign(predictions, horizon),
    }
}

/// Per element, the k-th deletion by day belongs to the k-th insertion by day.
/// A deletion ahead of its insertion moves onto the insertion day; a deletion
/// with no insertion left moves to the overflow slot.
pub fn fix_ordering(mut a: Assignment) -> Assignment {
    let overflow = a.overflow();
    let mut per: BTreeMap<ElementId, (Vec<usize>, Vec<usize>)> = BTreeMap::new();
    for (i, e) in a.events.iter().enumerate() {
        let slot = per.entry(e.element).or_default();
        match e.kind {
            EventKind::Insert => slot.0.push(i),
            EventKind::Delete => slot.1.push(i),
        }
    }
    for (_, (mut ins, mut del)) in per {
        ins.sort_by_key(|&i| (a.events[i].day, i));
        del.sort_by_key(|&i| (a.events[i].day, i));
        for (k, &d) in del.iter().enumerate() {
            match ins.get(k) {
                Some(&i) => {
                    let start = a.events[i].day;
                    if a.events[d].day < start {
                        a.events[d].day = start;
                    }
                }
                None => a.events[d].day = overflow,
            }
        }
    }
    a
}

pub fn check_feasible(a: &Assignment) -> Result<(), FeasibilityViolation> {
    let mut per_day: BTreeMap<(Day, EventKind), usize> = BTreeMap::new();
    let mut per: BTreeMap<ElementId, (Vec<Day>, Vec<Day>)> = BTreeMap::new();
    for e in &a.events {
        if e.day <= a.horizon {
            *per_day.entry((e.day, e.kind)).or_insert(0) += 1;
        }
        let slot = per.entry(e.element).or_default();
        match e.kind {
            EventKind::Insert => slot.0.push(e.day),
            EventKind::Delete => slot.1.push(e.day),
        }
    }
    if let Some((&(day, _), &count)) = per_day.iter().find(|(_, &c)| c > 1) {
        return Err(FeasibilityViolation::Crowded { day, count });
    }
    for (element, (mut ins, mut del)) in per {
        ins.sort_unstable();
        del.sort_unstable();
        for (k, &d) in del.iter().enumerate() {
            match ins.get(k) {
                Some(&i) if d < i => {
                    return Err(FeasibilityViolation::DeleteBeforeInsert { element, insert: i, delete: d })
                }
                None if d <= a.horizon => return Err(FeasibilityViolation::OrphanDelete { element, day: d }),
                _ => {}
            }
        }
    }
    Ok(())
}

/// Minimum total displacement assignment with one event per day, all kinds
/// sharing the line. Solved as an isotonic l1 regression of `p_i - i`.
pub fn optimal_offline_assign(predictions: &[Prediction], horizon: u32) -> Assignment {
    let overflow = horizon + 1;
    let mut events: Vec<AssignedEvent> = predictions
        .iter()
        .map(|p| AssignedEvent { element: p.element, kind: p.kind, predicted: p.day, day: overflow })
        .collect();
    let mut order: Vec<usize> = (0..events.len()).filter(|&i| events[i].predicted.resolve(horizon) <= horizon).collect();
    order.sort_by_key(|&i| (events[i].predicted.resolve(horizon), i));
    order.truncate(horizon as usize);
    let n = order.len() as i64;
    if n > 0 {
        let mut heap = BinaryHeap::new();
        let mut tops = Vec::with_capacity(order.len());
        for (k, &i) in order.iter().enumerate() {
            let b = i64::from(events[i].predicted.resolve(horizon)) - (k as i64 + 1);
            heap.push(b);
            if *heap.peek().unwrap() > b {
                heap.pop();
                heap.push(b);
            }
            tops.push(*heap.peek().unwrap());
        }
        let mut q = vec![0i64; order.len()];
        let last = order.len() - 1;
        q[last] = tops[last];
        for k in (0..last).rev() {
            q[k] = tops[k].min(q[k + 1]);
        }
        let cap = i64::from(horizon) - n;
        for (k, &i) in order.iter().enumerate() {
            events[i].day = (q[k].clamp(0, cap) + k as i64 + 1) as Day;
        }
    }
    Assignment { horizon, events }
}

/// Smallest possible maximum displacement over one-event-per-day assignments.
pub fn min_linf_error(predictions: &[Prediction], horizon: u32) -> u32 {
    let mut days: Vec<Day> =
        predictions.iter().map(|p| p.day.resolve(horizon)).filter(|&d| d <= horizon).collect();
    if days.len() > horizon as usize {
        return horizon;
    }
    days.sort_unstable();
    let feasible = |d: u32| {
        let mut next = 1u32;
        for &p in &days {
            let s = next.max(p.saturating_sub(d));
            if s > horizon.min(p + d) {
                return false;
            }
            next = s + 1;
        }
        true
    };
    let (mut lo, mut hi) = (0u32, horizon);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}
