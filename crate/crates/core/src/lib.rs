//! Fully dynamic algorithms that run ahead of time on a predicted update
//! sequence and repair their precomputation when reality diverges.
//!
//! The crate is organised bottom up:
//!
//! * [`model`]: events, predictions, bundles and the keyed l1 error.
//! * [`scheduler`]: online matching of predictions to days.
//! * [`partition_tree`]: the random hierarchy of day windows.
//! * [`engine`]: the divide-and-conquer engine with early and late handlers.
//! * [`incremental`] and [`decremental`]: adapters lifting one-sided structures.
//! * [`backstop`]: round-robin fallback and horizon doubling.
//! * [`problems`]: counter, connectivity, minimum spanning forest, decremental max.
//! * [`io`], [`generate`], [`harness`]: file formats, workloads and the CLI driver.

pub mod backstop;
pub mod decremental;
pub mod engine;
pub mod error;
pub mod generate;
pub mod harness;
pub mod incremental;
pub mod io;
pub mod model;
pub mod partition_tree;
pub mod problems;
pub mod scheduler;

pub use error::Error;
pub use model::{Day, ElementId, Event, EventKind, Payload, PredictedDay, Prediction, RealEvent, RealizedEvent};
