pub mod basis;
pub mod coeffs;
pub mod config;
pub mod error;
pub mod matel;
pub mod quadrature;
pub mod reproduce;
pub mod solver;
pub mod specfn;
pub mod systems;
pub mod talmi;

pub use error::{ObeError, Result, TableError};
