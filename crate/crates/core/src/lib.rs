//! Exact Courant-algebroid and spinor calculus on the flat 3-torus
//! `(R/2pi Z)^3`, with Moser-type deformation flows.
//!
//! The crate is split into an exact layer and a float layer. The exact layer
//! (pointwise algebra, trigonometric coefficient fields, Hodge theory,
//! brackets, structure normalization, the deformation operators) works over
//! arbitrary-precision rationals and proves its identities on the nose. The
//! float layer (grid sampling, flow integration) appears only where time
//! integration genuinely needs it, and is checked against the exact layer
//! wherever the two overlap.
//!
//! Conventions: coordinates have period `2 pi`; the volume orientation is
//! `d123 > 0`; mixed forms are stored on the monomial basis
//! `(1, d1, d2, d3, d12, d13, d23, d123)`; generalized vectors on
//! `(x1, x2, x3, xi1, xi2, xi3, lambda)`.

#![forbid(unsafe_code)]

pub mod algebra;
pub mod bracket;
pub mod clifford;
pub mod error;
pub mod fields;
pub mod g22;
pub mod gdiff;
pub mod grid;
pub mod hodge;
pub mod io;
pub mod linalg;
pub mod moser;
pub mod selftest;
pub mod trig;

pub use algebra::{BaTransform, GenVec, MixedForm, Rat};
pub use clifford::{Form3, GenVector, SpinorSign};
pub use error::Error;
pub use fields::{BaField, FormField3, GenVectorField};
pub use g22::{CohomologyVector, G22Structure};
pub use gdiff::{FlowSettings, GDiffElement, InfGDiff};
pub use grid::TorusGrid;
pub use moser::{MoserProblem, MoserReport, SeriesSolution};
pub use trig::TrigScalar;
