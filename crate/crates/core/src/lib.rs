//! Reflected walk-on-spheres for Laplace's equation with mixed
//! Dirichlet / zero-Neumann boundary conditions.

pub mod cli;
pub mod conformal;
pub mod contour;
pub mod domain;
pub mod estimator;
pub mod geometry;
pub mod reference;
pub mod reflection;
pub mod shapes;
pub mod svg;
pub mod walk;
pub mod wos3d;
