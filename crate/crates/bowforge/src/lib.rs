//! IO, JSON, numerics and the command-line front end over `bowforge-core`.

pub mod cli;
pub mod json;
pub mod moment;
