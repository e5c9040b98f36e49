//! Numerical analysis of regular homeomorphisms of the sphere, torus, Klein
//! bottle, annulus and Möbius strip.
//!
//! The crate estimates singular sets and limit sets from finite orbits,
//! computes rotation numbers and translation vectors, classifies maps into
//! their conjugacy classes and builds grid-sampled conjugacies to the
//! canonical models.

pub mod classifier;
pub mod conjugacy_builder;
pub mod error;
pub mod metric_space;
pub mod orbit_analysis;
pub mod rotation_invariants;
pub mod surface_maps;

pub use error::{Error, Result};
pub use metric_space::{Surface, SurfacePoint};
pub use surface_maps::SurfaceMap;
