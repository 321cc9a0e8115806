//! Maximum of a set that only shrinks.

use std::collections::BTreeMap;
use std::fmt;

use super::{ceil_log2, Oracle};
use crate::decremental::DecrementalContract;
use crate::error::Error;
use crate::model::{Day, ElementId, GroundSet, Payload};

#[derive(Clone, Copy, Debug, Default)]
pub struct DecrementalMax;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaxValue(pub Option<i64>);

impl fmt::Display for MaxValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(x) => write!(f, "{x}"),
            None => write!(f, "-"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValueBag {
    counts: BTreeMap<i64, u32>,
    len: u64,
}

/// `None` for an element that was only ever predicted; it takes no part.
fn value(element: ElementId, payload: Option<&Payload>) -> Result<Option<i64>, Error> {
    match payload {
        None => Ok(None),
        Some(&Payload::Value(x)) => Ok(Some(x)),
        _ => Err(Error::Contract(format!("element {element} carries no value"))),
    }
}

impl DecrementalContract for DecrementalMax {
    type State = ValueBag;
    type Output = MaxValue;

    fn initialize(&self, elements: &[(ElementId, Option<Payload>)]) -> Result<(ValueBag, u64), Error> {
        let mut bag = ValueBag::default();
        for (e, p) in elements {
            if let Some(x) = value(*e, p.as_ref())? {
                *bag.counts.entry(x).or_insert(0) += 1;
                bag.len += 1;
            }
        }
        let n = elements.len() as u64;
        Ok((bag, n * ceil_log2(n + 1) + 1))
    }

    fn delete(&self, bag: &mut ValueBag, element: ElementId, payload: Option<&Payload>) -> Result<u64, Error> {
        let Some(x) = value(element, payload)? else {
            return Ok(1);
        };
        match bag.counts.get_mut(&x) {
            Some(c) if *c > 1 => *c -= 1,
            Some(_) => {
                bag.counts.remove(&x);
            }
            None => return Err(Error::Contract(format!("deleted element {element} with value {x} is not present"))),
        }
        bag.len -= 1;
        Ok(ceil_log2(bag.len + 2))
    }

    fn state_units(&self, bag: &ValueBag) -> u64 {
        bag.counts.len() as u64 + 1
    }

    fn update_bound(&self, size: u64) -> u64 {
        ceil_log2(size + 2)
    }

    fn output(&self, bag: &ValueBag, _: Day) -> MaxValue {
        MaxValue(bag.counts.keys().next_back().copied())
    }
}

impl Oracle for DecrementalMax {
    type Output = MaxValue;

    fn evaluate(&self, present: &[ElementId], ground: &GroundSet) -> (MaxValue, u64) {
        let best = present
            .iter()
            .filter_map(|&e| match ground.payload(e) {
                Some(&Payload::Value(x)) => Some(x),
                _ => None,
            })
            .max();
        (MaxValue(best), present.len() as u64 + 1)
    }
}
