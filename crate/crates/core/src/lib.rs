//! Reachable sets of linear control systems via support functions, the fully
//! discrete minimum time function over triangulated fronts, and reconstruction
//! of bang-bang controls with the discrete adjoint.

pub mod adjoint;
pub mod catalog;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod mintime;
pub mod par;
pub mod reach;

pub use error::{Error, Result};
