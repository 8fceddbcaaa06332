use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("domain must have at least one axis")]
    EmptyDomain,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("axis {axis}: interval [{lo}, {hi}] is empty or non-finite")]
    BadInterval { axis: usize, lo: f64, hi: f64 },
    #[error("axis {axis}: subdivision count must be positive")]
    ZeroSubdivision { axis: usize },
    #[error("cell count overflows usize")]
    TooManyCells,
    #[error("axis {axis}: coordinate is not finite")]
    NonFinite { axis: usize },
    #[error("axis {axis}: coordinate {value} outside [{lo}, {hi}]")]
    OutsideDomain {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
}

/// Syntax and arity errors from the map expression language. Positions are
/// 1-based character offsets into the full input text.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("position {position}: expected {expected}, found {found}")]
    Syntax {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("position {position}: unknown identifier `{name}`")]
    UnknownIdentifier { position: usize, name: String },
    #[error("position {position}: division by constant zero")]
    ZeroDivisor { position: usize },
    #[error("expected {expected} expression(s), one per axis, found {found}")]
    Arity { expected: usize, found: usize },
}

impl ParseError {
    pub fn position(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { position, .. }
            | ParseError::UnknownIdentifier { position, .. }
            | ParseError::ZeroDivisor { position } => Some(*position),
            ParseError::Arity { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("{map} requires {requirement}")]
    BadDomain {
        map: &'static str,
        requirement: &'static str,
    },
    #[error("northsouth amplitude {a} violates |2*pi*a| < 1; the map would not be invertible")]
    NotInvertible { a: f64 },
    #[error("parameter must be finite")]
    NonFiniteParameter,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("map evaluation produced a non-finite value on axis {axis}")]
    NonFinite { axis: usize },
    #[error("map image leaves the domain: {0}")]
    OutsideDomain(GridError),
    #[error(transparent)]
    Grid(GridError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("epsilon must be positive and finite, got {0}")]
    BadEpsilon(f64),
    #[error("cell {cell}: successor {succ} out of range for {num_cells} cells")]
    SuccessorOutOfRange {
        cell: usize,
        succ: usize,
        num_cells: usize,
    },
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConleyError {
    #[error("downset is not closed: Morse node {missing} is reachable from {from} but not included")]
    DownsetNotClosed { from: usize, missing: usize },
    #[error("unknown Morse node {0}")]
    UnknownMorseNode(usize),
    #[error("{count} Morse nodes exceed the lattice cap of {cap}")]
    CapExceeded { count: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("attractor-repeller pair is trivial (empty attractor or repeller)")]
    TrivialPair,
    #[error("family does not separate Morse nodes {0} and {1}")]
    NotSeparated(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecurrenceError {
    #[error("delta must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error(transparent)]
    Map(#[from] MapError),
}
