//! Pointwise exterior calculus for geometries with torsion and non-metricity.

pub mod autoparallel;
pub mod cartan;
pub mod catalog;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod fieldeq;
pub mod geometry;
pub mod jet;
pub mod sampling;

pub use error::{GeomError, Result};
