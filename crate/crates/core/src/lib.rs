//! Mining the full closure structure of a binary dataset.
//!
//! Given a 0/1 object-attribute table this crate enumerates every closed
//! itemset, builds the covering graph with per-concept delta measures,
//! reconstructs the level structure (minimum generator sizes and the
//! passkeys themselves), partitions concepts into delta-equivalence classes
//! for every threshold, and produces distribution reports plus empirical
//! stability checks under object removal.
//!
//! The usual pipeline is [`delta::annotate_all`], which returns the concept
//! graph, the level structure and the per-concept delta annotation in one
//! call. The individual stages are available separately:
//!
//! - [`context`]: parsing (FIMI `.dat`, CSV) and the derivation operators
//! - [`concepts`]: closed itemset enumeration and the covering graph
//! - [`levels`]: passkey levels and the closure index
//! - [`delta`]: per-threshold partitions and delta values of passkeys
//! - [`stability`]: removal bounds and sampling survival reports
//! - [`oracle`]: exhaustive reference implementations for small inputs
//! - [`report`]: CSV/JSON/SVG export with a hashed manifest

pub mod bitset;
pub mod concepts;
pub mod context;
pub mod delta;
pub mod error;
pub mod levels;
pub mod oracle;
pub mod report;
pub mod stability;

pub use bitset::{AttributeSet, ObjectSet};
pub use context::{CsvMode, FormalContext};
pub use error::{Error, Result};
