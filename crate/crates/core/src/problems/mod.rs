//! Concrete problems: a counter, connectivity, minimum spanning forest and a
//! decremental maximum, each with a from-scratch oracle.

use std::fmt;

use crate::model::{ElementId, GroundSet};

pub mod connectivity;
pub mod counter;
pub mod decmax;
pub mod msf;

/// Recomputes the answer from the multiset of present elements.
pub trait Oracle {
    type Output: Clone + PartialEq + fmt::Debug + fmt::Display;

    /// Answer and units of work spent.
    fn evaluate(&self, present: &[ElementId], ground: &GroundSet) -> (Self::Output, u64);
}

fn ceil_log2(n: u64) -> u64 {
    u64::from(n.max(1).next_power_of_two().trailing_zeros())
}
