//! Numerical geometry of CP^3 with the squashed metrics g_a.

pub mod ambient;
pub mod catalog;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod frames;
pub mod hopf;
pub mod isometry;
pub mod lagrangian;
pub mod report;

pub use ambient::{AmbientVector, SpherePoint, C64};
pub use error::{GeomError, Result};
pub use hopf::{MetricParam, TangentRep};
