//! Finite-resolution chain recurrence for maps on boxes and tori.
//!
//! The pipeline runs grid → transition graph → Morse partition → attractor
//! family → complete Lyapunov function, with verification reports at each
//! stage. [`recurrence`] holds the statistical recurrence and connectivity
//! checks for measure-preserving maps.

pub mod cellset;
pub mod chaingraph;
pub mod conley;
pub mod error;
pub mod expr;
pub mod grid;
pub mod lyapunov;
pub mod mapdef;
pub mod recurrence;

pub use cellset::CellSet;
pub use chaingraph::{build_graph, morse_partition, EdgeMode, MorsePartition, TransitionGraph};
pub use conley::{
    attractor_from_downset, canonical_family, full_lattice, verify_lemma_dual, verify_separation,
    AttractorFamily, AttractorPair, FamilyKind,
};
pub use error::{ConleyError, GraphError, GridError, LyapunovError, MapError, ParseError, RecurrenceError};
pub use grid::{CellId, Domain, Grid, Point};
pub use lyapunov::{complete_lyapunov, pair_lyapunov, verify_complete, CompleteLyapunov, PairFunction};
pub use mapdef::{parse_map, MapInstance, MapKind, MapSpec};
