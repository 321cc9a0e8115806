//! Fully dynamic structure from a deletion-only one when insertions are
//! predicted.
//!
//! Every element `e` of the predicted ground set has an anti-element. The
//! anti-element is present exactly when `e` is absent, so insertions of `e` are
//! deletions of its anti-element and vice versa. The deletion-only structure
//! starts from the whole ground set and each present anti-element deletes its
//! element from it, which turns the problem into an insert-only one over
//! anti-elements with predicted deletions.

use std::collections::BTreeSet;
use std::fmt;

use crate::engine::{Engine, EngineConfig};
use crate::error::Error;
use crate::incremental::{IncrementalContract, Lifted};
use crate::model::{Day, ElementId, Event, EventKind, GroundSet, Payload, PredictedDay, RealEvent};

pub trait DecrementalContract {
    type State: Clone;
    type Output: Clone + PartialEq + fmt::Debug;

    /// Builds the structure over a ground set; returns it with the units spent.
    fn initialize(&self, elements: &[(ElementId, Option<Payload>)]) -> Result<(Self::State, u64), Error>;

    fn delete(&self, state: &mut Self::State, element: ElementId, payload: Option<&Payload>) -> Result<u64, Error>;

    fn state_units(&self, state: &Self::State) -> u64;

    /// Declared worst-case units of one deletion on a ground set of this size.
    fn update_bound(&self, size: u64) -> u64;

    fn output(&self, state: &Self::State, day: Day) -> Self::Output;
}

/// The insert-only view over anti-elements.
#[derive(Clone, Debug)]
pub struct AntiView<D: DecrementalContract> {
    inner: D,
    universe: Vec<(ElementId, Option<Payload>)>,
    initial: D::State,
}

impl<D: DecrementalContract> AntiView<D> {
    fn new(inner: D, universe: Vec<(ElementId, Option<Payload>)>) -> Result<(AntiView<D>, u64), Error> {
        let (initial, cost) = inner.initialize(&universe)?;
        Ok((AntiView { inner, universe, initial }, cost))
    }

    fn grow(&mut self, element: ElementId, payload: Option<Payload>) -> Result<u64, Error> {
        self.universe.push((element, payload));
        let (initial, cost) = self.inner.initialize(&self.universe)?;
        self.initial = initial;
        Ok(cost)
    }
}

impl<D: DecrementalContract> IncrementalContract for AntiView<D> {
    type State = D::State;
    type Output = D::Output;

    fn init(&self) -> D::State {
        self.initial.clone()
    }

    fn insert(&self, state: &mut D::State, element: ElementId, payload: Option<&Payload>) -> Result<u64, Error> {
        self.inner.delete(state, element, payload)
    }

    fn state_units(&self, state: &D::State) -> u64 {
        self.inner.state_units(state)
    }

    fn update_bound(&self) -> u64 {
        self.inner.update_bound(self.universe.len() as u64)
    }

    fn output(&self, state: &D::State, day: Day) -> D::Output {
        self.inner.output(state, day)
    }
}

pub struct DecrementalAdapter<D: DecrementalContract> {
    engine: Engine<Lifted<AntiView<D>>>,
    members: BTreeSet<ElementId>,
    reinitializations: u64,
    initialize_units: u64,
}

impl<D: DecrementalContract> DecrementalAdapter<D> {
    /// `members` lists the predicted ground set with each element's predicted
    /// first insertion.
    pub fn new(
        contract: D,
        members: &[(ElementId, PredictedDay)],
        ground: GroundSet,
        cfg: EngineConfig,
    ) -> Result<DecrementalAdapter<D>, Error> {
        let mut seen = BTreeSet::new();
        let universe: Vec<(ElementId, Option<Payload>)> = members
            .iter()
            .filter(|(e, _)| seen.insert(*e))
            .map(|(e, _)| (*e, ground.payload(*e).cloned()))
            .collect();
        let (view, cost) = AntiView::new(contract, universe)?;
        let mut engine = Engine::online(Lifted(view), ground, cfg)?;
        let mut added = BTreeSet::new();
        for &(e, p) in members {
            if added.insert(e) {
                engine.add_initial_item(e, p)?;
            }
        }
        Ok(DecrementalAdapter { engine, members: seen, reinitializations: 0, initialize_units: cost })
    }

    pub fn run_day(&mut self, ev: &RealEvent) -> Result<D::Output, Error> {
        self.engine.begin_day(ev.day)?;
        let e = ev.event.element;
        match ev.event.kind {
            EventKind::Insert if !self.members.contains(&e) => {
                self.engine.ground_mut().absorb([&ev.event]);
                let payload = self.engine.ground().payload(e).cloned();
                self.members.insert(e);
                self.reinitializations += 1;
                self.initialize_units += self.engine.problem_mut().0.grow(e, payload)?;
                self.engine.add_settled_item(e, 0, ev.day);
                self.engine.recompute_all()?;
            }
            EventKind::Insert => {
                let anti = RealEvent { day: ev.day, event: Event { kind: EventKind::Delete, ..ev.event.clone() }, prediction: None };
                self.engine.apply_real(&anti)?;
            }
            EventKind::Delete => {
                let anti = RealEvent {
                    day: ev.day,
                    event: Event { kind: EventKind::Insert, ..ev.event.clone() },
                    prediction: Some(ev.prediction.unwrap_or(PredictedDay::EndOfHorizon)),
                };
                self.engine.apply_real(&anti)?;
            }
        }
        self.engine.finish_day()
    }

    /// Number of insertions from outside the predicted ground set.
    pub fn reinitializations(&self) -> u64 {
        self.reinitializations
    }

    pub fn initialize_units(&self) -> u64 {
        self.initialize_units
    }

    pub fn members(&self) -> &BTreeSet<ElementId> {
        &self.members
    }

    pub fn engine(&self) -> &Engine<Lifted<AntiView<D>>> {
        &self.engine
    }

    /// Elements present at the end of `day`: the ground set minus the
    /// anti-elements present then.
    pub fn present_at(&self, day: Day) -> Vec<ElementId> {
        let anti: BTreeSet<ElementId> = self.engine.present_at(day).into_iter().collect();
        self.members.iter().copied().filter(|e| !anti.contains(e)).collect()
    }
}
