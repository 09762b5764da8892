use alloc::string::String;
use core::fmt;

use crate::diagram::NodeId;

/// Every failure the combinatorial layer can report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Diagram text did not match the grammar; `pos` is a byte offset.
    Syntax { pos: usize, msg: String },
    /// Structural invariant broken (counts, cut, ids).
    Invalid(String),
    UnknownNode(NodeId),
    NotAdjacent(NodeId, NodeId),
    SameKind(NodeId, NodeId),
    /// A move would carry a node across the cut of a finite diagram.
    CrossesCut(NodeId, NodeId),
    NotSeparated,
    Precondition(String),
    Overflow,
    /// The ledger cannot follow a move (missing brane, duplicate slot, coverage drift).
    Ledger(String),
    NotSupersymmetric,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Syntax { pos, msg } => write!(f, "syntax error at byte {pos}: {msg}"),
            Error::Invalid(m) => write!(f, "invalid diagram: {m}"),
            Error::UnknownNode(id) => write!(f, "unknown node id {}", id.0),
            Error::NotAdjacent(a, b) => write!(f, "nodes {} and {} are not adjacent", a.0, b.0),
            Error::SameKind(a, b) => write!(f, "nodes {} and {} have the same kind", a.0, b.0),
            Error::CrossesCut(a, b) => {
                write!(f, "swapping {} and {} would cross the cut", a.0, b.0)
            }
            Error::NotSeparated => write!(f, "diagram is not separated"),
            Error::Precondition(m) => write!(f, "precondition violated: {m}"),
            Error::Overflow => write!(f, "integer overflow"),
            Error::Ledger(m) => write!(f, "ledger error: {m}"),
            Error::NotSupersymmetric => write!(f, "diagram is not supersymmetric"),
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn add(a: i64, b: i64) -> Result<i64, Error> {
    a.checked_add(b).ok_or(Error::Overflow)
}

pub(crate) fn sub(a: i64, b: i64) -> Result<i64, Error> {
    a.checked_sub(b).ok_or(Error::Overflow)
}

pub(crate) fn mul(a: i64, b: i64) -> Result<i64, Error> {
    a.checked_mul(b).ok_or(Error::Overflow)
}
