//! Goal-oriented adaptive multilevel stochastic Galerkin FEM for parametric
//! diffusion problems on planar domains.

pub mod adaptive;
pub mod error;
pub mod estimator;
pub mod fem;
pub mod geometry;
pub mod goals;
pub mod mesh;
pub mod mlspace;
pub mod output;
pub mod param;
pub mod problem;
pub mod solver;

pub use error::{Error, Result};
