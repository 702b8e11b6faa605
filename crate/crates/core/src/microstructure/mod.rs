//! Constituent materials, random geometry, and voxelized unit cells.

pub mod geometry;
pub mod material;
pub mod voxel;

pub use geometry::{GeometryBounds, GeometryParams, Interval, PlyLayout, PARAM_NAMES};
pub use material::{rotate_stiffness, stiffness_from_engineering, TransverseIsotropicMaterial};
pub use voxel::{fiber_fractions, voxelize, VoxelFractions, VoxelRVE};
