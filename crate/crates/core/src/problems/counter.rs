//! Number of present elements; the smallest useful insert-only structure.

use super::Oracle;
use crate::error::Error;
use crate::incremental::IncrementalContract;
use crate::model::{Day, ElementId, GroundSet, Payload};

#[derive(Clone, Copy, Debug, Default)]
pub struct Counter;

impl IncrementalContract for Counter {
    type State = u64;
    type Output = u64;

    fn init(&self) -> u64 {
        0
    }

    fn insert(&self, state: &mut u64, _: ElementId, _: Option<&Payload>) -> Result<u64, Error> {
        *state += 1;
        Ok(1)
    }

    fn state_units(&self, _: &u64) -> u64 {
        1
    }

    fn update_bound(&self) -> u64 {
        1
    }

    fn output(&self, state: &u64, _: Day) -> u64 {
        *state
    }
}

impl Oracle for Counter {
    type Output = u64;

    fn evaluate(&self, present: &[ElementId], _: &GroundSet) -> (u64, u64) {
        (present.len() as u64, present.len() as u64 + 1)
    }
}
