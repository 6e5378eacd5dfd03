//! Numerical exploration of generalized dominated splittings (GDS) for
//! derivative cocycles of product maps on tori.
//!
//! The crate is organized bottom-up:
//!
//! - [`systems`]: circle maps, toral automorphisms, rotations and products,
//!   with exact Jacobians.
//! - [`splittings`]: candidate splittings `E ⊕ F` and invariance checks.
//! - [`cocycle`]: overflow-safe restricted norms `‖Df^n|_E‖`, `m(Df^n|_F)`
//!   and the sequences `a_n`, `b_k`.
//! - [`analysis`]: dominated / GDS classification, Lyapunov spectra,
//!   recurrence to `A_ε`, uniform-negativity search and probes.
//! - [`decl`]: the text grammar for systems and splittings.
//!
//! Every "for all x" verdict is evaluated on a finite grid and is reported
//! as evidence unless a violation was found.

pub mod analysis;
pub mod cocycle;
pub mod decl;
pub mod error;
pub mod grid;
pub mod linalg;
mod par;
pub mod splittings;
mod sweep;
pub mod systems;

pub use error::{Error, Result};
pub use grid::{Grid, GridSpec};
pub use linalg::Mat;
pub use splittings::SplittingSpec;
pub use systems::{TorusMapSystem, TorusPoint};
