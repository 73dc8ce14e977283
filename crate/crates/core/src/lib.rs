//! Impartial selection on nomination graphs.
//!
//! A nomination graph is a loop-free directed graph in which an edge
//! `u → v` means that `u` nominates `v`. A selection mechanism picks at most
//! one vertex; it is impartial when no vertex can change whether it is
//! picked by changing its own nominations.
//!
//! * [`graph`]: the graph model, graph classes, enumeration, sampling and
//!   the text format.
//! * [`twin_threshold`]: the twin threshold mechanism, its deletion trace and
//!   threshold planning.
//! * [`mechanisms`]: baseline and control mechanisms behind one trait.
//! * [`audit`]: exhaustive and sampled checks of impartiality, additive
//!   gaps, trace invariants and symmetrized randomized mechanisms.
//! * [`partition`]: composition graphs, multiplicities, transitions and the
//!   exact infeasibility certificate; [`linear`] verifies such certificates.

pub mod audit;
pub mod error;
pub mod graph;
pub mod linear;
pub mod mechanisms;
pub mod partition;
pub mod twin_threshold;

pub use error::{Error, Result};
pub use graph::{parse_graph, serialize_graph, DirectedGraph, GraphClassSpec, Permutation, Vertex};
pub use mechanisms::{MechanismId, Outcome, SelectionMechanism};
pub use partition::OrderedPartition;
pub use twin_threshold::{run_twin_threshold, DeletionTrace, PlanReport, ThresholdPair};
