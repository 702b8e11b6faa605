//! Polynomial chaos expansions on orthonormal Legendre bases.

pub mod basis;
pub mod lar;
pub mod legendre;
pub mod model;

pub use basis::{build_basis, MultiIndex};
pub use legendre::legendre_orthonormal;
pub use model::{fit_lar, least_squares, LarOptions, LeastSquaresFit, PceModel};
