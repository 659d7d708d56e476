//! Exact, invariant-level computations for generalized complex geometry:
//! generalized complex structures on Lie algebras, pure spinors, transverse
//! Dolbeault-type complexes with their Hodge theory, and Čech data of
//! generalized holomorphic bundles.

pub mod bundles;
pub mod complexes;
pub mod expr;
pub mod gcs;
pub mod exterior;
pub mod lie;
pub mod linalg;
pub mod scalar;

pub use exterior::{BasedSpace, GeneralizedVector, Multivector};
pub use scalar::GaussianRational;
