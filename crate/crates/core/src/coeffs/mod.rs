//! Basis-transformation coefficients: rotation brackets between Jacobi
//! sets, hyperspherical coefficients, and their on-disk cache.

pub mod bm;
pub mod hyper;
pub mod store;

pub use bm::{brody_moshinsky, BMTable, QLBlock};
pub use hyper::{hyperspherical_coefficient, HyperTable};
pub use store::{load_tables, save_tables, CoefficientTables};
