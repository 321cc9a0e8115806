//! Lifting an insert-only structure into the window engine.
//!
//! A window's memory is the structure after inserting every element that is
//! present throughout the window. The parent already holds everything present
//! throughout the parent, so a window only inserts its own permanents, which
//! are bounded by the number of updates in the sibling window.

use std::fmt;

use crate::engine::{DncProblem, Engine, EngineConfig, WindowInput};
use crate::error::Error;
use crate::model::{Day, ElementId, GroundSet, Payload, Prediction, RealEvent};

pub trait IncrementalContract {
    type State: Clone;
    type Output: Clone + PartialEq + fmt::Debug;

    fn init(&self) -> Self::State;

    /// Inserts one element and returns the units spent.
    fn insert(&self, state: &mut Self::State, element: ElementId, payload: Option<&Payload>) -> Result<u64, Error>;

    fn state_units(&self, state: &Self::State) -> u64;

    /// Declared worst-case units of a single insertion.
    fn update_bound(&self) -> u64;

    fn output(&self, state: &Self::State, day: Day) -> Self::Output;
}

/// An [`IncrementalContract`] seen as a window problem.
#[derive(Clone, Debug)]
pub struct Lifted<C>(pub C);

impl<C: IncrementalContract> Lifted<C> {
    fn checked_insert(&self, state: &mut C::State, element: ElementId, input: &WindowInput<'_>) -> Result<u64, Error> {
        let cost = self.0.insert(state, element, input.ground.payload(element))?;
        let bound = self.0.update_bound();
        if cost > bound {
            return Err(Error::Contract(format!("insertion of {element} cost {cost} units, declared bound {bound}")));
        }
        Ok(cost)
    }
}

impl<C: IncrementalContract> DncProblem for Lifted<C> {
    type Memory = C::State;
    type Output = C::Output;

    fn root_memory(&self) -> C::State {
        self.0.init()
    }

    fn memory_units(&self, m: &C::State) -> u64 {
        self.0.state_units(m)
    }

    fn compute_window(&self, input: &WindowInput<'_>, m: &mut C::State) -> Result<u64, Error> {
        let mut cost = 0;
        for s in input.permanents() {
            cost += self.checked_insert(m, s.element, input)?;
        }
        for s in input.settled_today() {
            cost += self.checked_insert(m, s.element, input)?;
        }
        Ok(cost)
    }

    fn output(&self, leaf: &C::State, day: Day) -> C::Output {
        self.0.output(leaf, day)
    }
}

/// Engine for a full prediction sequence over an insert-only structure.
pub fn predicted<C: IncrementalContract>(
    contract: C,
    predictions: &[Prediction],
    ground: GroundSet,
    cfg: EngineConfig,
) -> Result<Engine<Lifted<C>>, Error> {
    Engine::with_predictions(Lifted(contract), predictions, ground, cfg)
}

/// Fully dynamic structure from an insert-only one when each insertion
/// arrives with a predicted deletion day.
pub struct IncrementalAdapter<C: IncrementalContract> {
    engine: Engine<Lifted<C>>,
}

impl<C: IncrementalContract> IncrementalAdapter<C> {
    pub fn new(contract: C, ground: GroundSet, cfg: EngineConfig) -> Result<IncrementalAdapter<C>, Error> {
        Ok(IncrementalAdapter { engine: Engine::online(Lifted(contract), ground, cfg)? })
    }

    pub fn run_day(&mut self, ev: &RealEvent) -> Result<C::Output, Error> {
        self.engine.run_day(ev)
    }

    pub fn engine(&self) -> &Engine<Lifted<C>> {
        &self.engine
    }

    pub fn into_engine(self) -> Engine<Lifted<C>> {
        self.engine
    }
}
