//! Compressing typed multigraph databases with motif code tables, and
//! scoring graphs by their encoded length.

pub mod bench;
pub mod canon;
pub mod cli;
pub mod encoding;
pub mod enumerate;
pub mod error;
pub mod graph;
pub mod mis;
pub mod pipeline;
pub mod search;

pub use canon::{canonical_form, is_isomorphic, CanonicalKey, Motif, RawMotif, TypedEdge};
pub use enumerate::{enumerate_simple_occurrences, EnumerationConfig, SimpleOccurrence};
pub use error::{Error, Result};
pub use graph::{GraphDatabase, LabeledMultiGraph, NodeId, TypeAlphabet, TypeId};
