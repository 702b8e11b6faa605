//! Periodic homogenization of tri-ply fiber composite unit cells and a
//! non-intrusive surrogate workflow on top of it: Latin hypercube designs,
//! PCA of the homogenized stiffness, sparse Legendre chaos expansions fitted
//! by least angle regression, and Sobol indices from the expansion
//! coefficients.

pub mod error;
pub mod fem;
pub mod microstructure;
pub mod voigt;

pub use error::{Error, Result};
pub mod pca;
pub mod pce;
pub mod pipeline;
pub mod sampling;
pub mod sobol;
pub mod vtk;
