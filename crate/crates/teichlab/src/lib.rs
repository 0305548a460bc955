//! Computational toolkit for singular-flat surfaces of quadratic differentials,
//! their Teichmüller rays and conformal limits, measured train tracks, crowned
//! hyperbolic geometry, and harmonic maps from the plane to the hyperbolic plane.

pub mod catalog;
pub mod crowned;
pub mod flatsurf;
pub mod harmonic;
pub mod json;
pub mod limits;
pub mod ribbon;
pub mod svg;
pub mod traintrack;
