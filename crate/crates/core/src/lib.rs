//! Exact A2 spider calculus.
//!
//! Webs are normalized to Kuperberg's non-elliptic basis by the loop, digon and
//! square relations; traces and Gram matrices are computed over exact
//! cyclotomic scalars; and the path-algebra side realizes the double complex
//! of the SU(3) fusion graphs `A^(n)` together with the strip-matrix presentation.

pub mod algebra;
pub mod error;
pub mod graph;
pub mod hecke;
pub mod pathalg;
pub mod pathchecks;
pub mod rewrite;
pub mod report;
pub mod scalar;
pub mod suites;
pub mod web;

pub use error::{Error, Result};
pub use scalar::{qint, CycloScalar, LaurentScalar};
pub use web::{Sign, SignString, Web};
