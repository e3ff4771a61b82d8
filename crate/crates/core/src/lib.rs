//! Minimal cones in the first Heisenberg group.
//!
//! A family of disjoint open arcs of the unit circle determines a cone
//! `C(I)`, the t-graph of a piecewise quadratic function `u_I`. This crate
//! builds these surfaces and checks their properties: horizontal lifting,
//! homogeneity, singular set, C1 regularity, a calibration certificate of
//! minimality and numerical perimeter comparisons.
//!
//! Modules:
//! - [`hgroup`]: group law, dilations, frame, divergence, horizontal lifts.
//! - [`arcs`]: arc families, sector location, gaps.
//! - [`cone`]: the surface, its gradient, singular set and classification.
//! - [`calibrate`]: the calibrating vector field and its divergence checks.
//! - [`perimeter`]: perimeter quadrature and perturbation experiments.
//! - [`export`]: triangle meshes and figure line data.

pub mod arcs;
pub mod calibrate;
pub mod cone;
pub mod error;
pub mod export;
pub mod geom;
pub mod hgroup;
pub mod json;
pub mod perimeter;

pub use arcs::{Arc, ArcFamily, Gap, GeometricTail, SectorLocation, Side};
pub use calibrate::{CalibrationField, SectorDecomposition};
pub use cone::{classify, ConeSurface, Gradient, Sided, SingularSet, SurfaceClassification, SurfaceSpec};
pub use error::{Error, Result};
pub use geom::Vec2;
pub use hgroup::{HPoint, HVector, PlanarCurve};
pub use perimeter::{Bump, Domain2D, GraphFunction};
