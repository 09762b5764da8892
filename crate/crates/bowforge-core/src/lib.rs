//! Exact combinatorics of affine and finite type A bow diagrams.
//!
//! Everything here is integer arithmetic over `i64` with overflow checks.
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;

pub mod brane;
pub mod diagram;
mod error;
pub mod hw;
pub mod moves;
pub mod susy;
pub mod weights;

pub use brane::{Brane, BraneLedger, Dir};
pub use diagram::{BowDiagram, NodeId, NodeKind, SeparatedForm, Shape};
pub use error::Error;
pub use moves::{Move, MoveLog};
pub use susy::{decide_supersymmetry, Certificate, Witness};

pub type Result<T> = core::result::Result<T, Error>;
