//! Multivariate Matérn covariance models.
//!
//! The crate covers four layers:
//!
//! * scalar special functions ([`specfun`]) and the univariate and
//!   multivariate Matérn / Gaussian kernels ([`kernels`]);
//! * matrix predicates for positive and conditionally negative
//!   semidefiniteness plus Bernstein-matrix construction ([`matrix`]);
//! * a registry of sufficient validity condition sets with structured
//!   reports ([`validity`]) and the collocated-correlation bounds derived
//!   from them ([`bounds`]);
//! * an estimation pipeline: empirical variograms, weighted least squares,
//!   Gaussian likelihood, constrained adaptive Metropolis and DIC
//!   ([`geostat`]).

pub mod bounds;
pub mod crosscheck;
pub mod error;
pub mod geostat;
pub mod kernels;
pub mod matrix;
pub mod quadrature;
pub mod specfun;
pub mod validity;

pub use error::{Error, Result};
pub use kernels::{GaussianSpec, MaternSpec, SiteSet};
pub use matrix::{BernsteinFn, PsdVerdict, SymMatrix};
pub use validity::{ConditionReport, ConditionSet};
