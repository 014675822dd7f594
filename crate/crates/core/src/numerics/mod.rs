//! Self-contained numerical kernels shared by the rest of the crate.

mod hermite;
mod linalg;
mod logmag;
mod quadrature;

pub use hermite::{hermite, hermite_block};
pub use linalg::{pencil_eigen_min, symmetric_eigen, SymEigen, SymMatrix};
pub use logmag::{LogMagnitude, LINEAR_FLOOR};
pub use quadrature::{gauss_legendre_rule, QuadratureRule};
