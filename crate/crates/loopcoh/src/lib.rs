//! Exact mod-2 cohomology computations for free loop spaces of BSO(n) and
//! BSpin(n), checked degree by degree.
//!
//! The crate builds, entirely over F_2 and without floating point:
//!
//! * bit-packed linear algebra ([`f2`]),
//! * graded polynomial algebras with weighted generators and their
//!   Poincaré series ([`poly`]),
//! * Steenrod squares defined on degree-one classes and extended by the
//!   Cartan formula, with re-expression of symmetric classes in the
//!   Stiefel-Whitney basis ([`steenrod`]),
//! * symmetric-group actions on H*(BA_{n-1}) and their invariant rings
//!   ([`invariants`]),
//! * the free-loop-space model H*(X) ⊗ Δ(σy_1, ..., σy_n) with the
//!   suspension derivation and its squaring rule ([`loops`]),
//! * Spin presentations, tensor products over the base ring, Euler-class
//!   multiplication and Gysin assembly ([`gysin`]),
//! * the end-to-end verification suite driven by the CLI ([`verify`]).

pub mod error;
pub mod f2;
pub mod gysin;
pub mod invariants;
pub mod loops;
pub mod poly;
pub mod steenrod;
pub mod verify;

pub use error::{Error, Result};
