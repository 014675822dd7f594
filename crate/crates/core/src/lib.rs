//! Numerical laboratory for the eigenvalues `λ_n(c)` of the time-frequency
//! localization operator `S = P_I Q_J P_I` on a pair of intervals with
//! time-bandwidth product `c = |I||J|`.
//!
//! The crate has two halves. [`prolate`] computes reference spectra with a
//! Nyström discretization of the sinc kernel. The remaining modules build
//! the constructive lower-bound machinery around those spectra:
//!
//! * [`packing`] packs the unit square with disjoint closed disks by grid
//!   subdivision,
//! * [`fock`] turns a packing into a family of time-frequency shifted
//!   Hermite functions and computes their Gram matrix,
//! * [`bounds`] evaluates the explicit constants and reference estimates,
//! * [`certify`] runs the min-max argument numerically and compares the
//!   result with the analytic bound and the Nyström reference.
//!
//! Everything is double precision. Quantities that are exponentially small
//! in `c` are carried as [`numerics::LogMagnitude`].

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod certify;
mod error;
pub mod fock;
pub mod format;
pub mod numerics;
pub mod packing;
pub mod prolate;

pub use error::{Error, Result};
