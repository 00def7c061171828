//! Exact-arithmetic toolkit for no-signalling correlation boxes.
//!
//! Every probability is an exact rational. The crate covers the box data
//! model and its relabelling symmetries, the no-signalling polytope (its
//! equality description, dimension and vertices), locality tests with
//! separating Bell functionals, wirings of boxes into other boxes, and the
//! extension of a bipartite box to an environment party.

pub mod bell;
pub mod boxes;
pub mod classify;
pub mod comm;
pub mod dd;
pub mod error;
pub mod extension;
pub mod families;
pub mod io;
pub mod linalg;
pub mod locality;
pub mod lp;
pub mod polytope;
pub mod presets;
pub mod rational;
pub mod relabel;
pub mod shape;
pub mod theorem1;
pub mod vertices;
pub mod wiring;

pub use boxes::{CorrBox, ValidationReport, Violation};
pub use error::{Error, Result};
pub use rational::Rational;
pub use relabel::{Relabelling, RelabellingGroup};
pub use shape::BoxShape;
