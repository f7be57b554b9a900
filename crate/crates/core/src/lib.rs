//! Tenfold classification of one-dimensional gapped operators through
//! Lagrangian planes of their boundary symplectic spaces.
//!
//! The pipeline for a bulk operator is: boundary form `J` and the planes
//! `l_E^+`, `l_E^-` of boundary values of decaying solutions ([`models`]),
//! then the Leray unitaries of those planes ([`symplectic`]), then the Cartan
//! class of the declared symmetries ([`symmetry`]) and the class index
//! ([`index`]). Junctions between two bulks are analysed in [`junction`], and
//! [`verify`] counts near-zero modes of finite discretizations as an
//! independent check.

pub mod error;
pub mod index;
pub mod junction;
pub mod linalg;
pub mod models;
pub mod sampling;
pub mod symmetry;
pub mod symplectic;
pub mod verify;

pub use error::{Error, Result};
pub use index::IndexValue;
pub use linalg::{CMatrix, Frame, RMatrix, Tolerances};
pub use symmetry::CartanClass;
