//! Lagrangian and Hamiltonian mechanics on a coordinate chart of ℝⁿ.
//!
//! Systems are entered as a kinetic metric plus a potential (or directly as
//! a Lagrangian in `q` and `q̂`) using the expression language in [`expr`].
//! Derivatives come from forward-mode jets, so momenta, forces, Hessians and
//! Christoffel symbols are exact up to round-off.

pub mod error;
pub mod expr;
pub mod mechsys;
pub mod integrate;
pub mod linmodes;
pub mod conserve;
pub mod numeric;
pub mod radial;
pub mod hamjac;
pub mod fieldlab;

pub use error::{Error, Result};
