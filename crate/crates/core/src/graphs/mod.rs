//! Cubic-graph corpora: graph6 I/O, canonical labels and enumeration.

mod canon;
mod cubic;
mod graph6;

pub use canon::{canonical_code, canonical_form, canonical_permutation, MAX_CANONICAL_ORDER};
pub use cubic::{enumerate_cubic, CanonicalGraph, MAX_CUBIC_ORDER, MIN_CUBIC_ORDER};
pub use graph6::{
    emit_graph6, parse_graph6, parse_graph6_lines, HEADER as GRAPH6_HEADER, MAX_ORDER as GRAPH6_MAX_ORDER,
};
