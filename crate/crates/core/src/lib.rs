//! Exact large-N Wilson loop expectations on the hypercubic lattice.
//!
//! The crate has two independent engines. [`solver`] evaluates the master
//! loop equation recursively with memoization, while [`enumerator`] glues
//! plaquettes into planar embedded maps by brute force and sums their
//! signed Catalan weights. The two are expected to agree term by term.

pub mod assignments;
pub mod enumerator;
pub mod lattice;
pub mod loops;
pub mod maps;
pub mod pinching;
pub mod pps;
pub mod solver;
pub mod suites;
pub mod weights;

pub use assignments::PlaquetteAssignment;
pub use lattice::{Edge, Plaquette, Vertex};
pub use loops::Loop;
pub use maps::EmbeddedMap;
