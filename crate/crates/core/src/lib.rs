//! Simulation and numerical analysis of fractal percolation sets.
//!
//! The crate samples level-`n` approximations of percolation sets with
//! arbitrary retention tables, projects and slices them in the plane, and
//! implements the transfer operator whose eigenfunctions govern the
//! existence of intervals in projections.

pub mod branching;
pub mod carpet;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod level;
pub mod numfmt;
pub mod params;
pub mod rng;
pub mod stats;
pub mod transfer;
pub mod word;

pub use error::{Error, Result};
pub use level::{
    intersect_level_sets, raster, sample_conditioned, sample_level_set, BitGrid, LevelSet,
};
pub use params::{validate_params, PercolationParams, RawParams};
pub use word::CellWord;
