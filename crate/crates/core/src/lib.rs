//! Exact computations on regular filtered φ-modules.
//!
//! A module is given by Frobenius eigenvalues, Hodge–Tate weights and a
//! complete flag written in the eigenbasis. From it we build the operators
//! `T_I` (one per proper nonempty subset of eigenvalues), the linear map
//! `t` onto filtration-preserving endomorphisms, its kernels, the
//! split / cosplit / critical / very critical classification, symbolic
//! representation skeletons, and the recovery of the flag from kernel data.
//! Everything is exact rational arithmetic.

pub mod coxeter;
pub mod error;
pub mod exterior;
pub mod linalg;
pub mod phi_module;
pub mod reconstruct;
pub mod report;
pub mod skeleton;
pub mod subset;
pub mod suite;
pub mod tmap;

pub use error::{Error, Result};
pub use linalg::{Matrix, Subspace, Q};
pub use phi_module::FilteredPhiModule;
pub use subset::Subset;
