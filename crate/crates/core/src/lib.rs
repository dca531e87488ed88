//! Isoperimetric and spectral checks on spindle surfaces, doubled spherical
//! polygons and spherical regions.
//!
//! Numerical code is generic over [`Real`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common types.

// `!(x > 0)` is used on purpose so that NaN takes the error branch.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod error;
pub mod fem;
pub mod isoperimetry;
pub mod quadrature;
pub mod scalar;
pub mod smoothing;
pub mod spectral;
pub mod sphere_geom;
pub mod spindle;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SpindleParam64 = spindle::SpindleParam<f64>;
pub type SpindleParam32 = spindle::SpindleParam<f32>;
pub type UnitVec64 = sphere_geom::UnitVec<f64>;
pub type UnitVec32 = sphere_geom::UnitVec<f32>;
pub type SphericalPolygon64 = sphere_geom::SphericalPolygon<f64>;
pub type SphericalPolygon32 = sphere_geom::SphericalPolygon<f32>;
pub type SphericalRegion64 = sphere_geom::SphericalRegion<f64>;
pub type SphericalRegion32 = sphere_geom::SphericalRegion<f32>;
pub type SmoothedTipProfile64 = smoothing::SmoothedTipProfile<f64>;
pub type SmoothedTipProfile32 = smoothing::SmoothedTipProfile<f32>;
pub type EigenResult64 = spectral::EigenResult<f64>;
pub type EigenResult32 = spectral::EigenResult<f32>;
pub type SurfaceMesh64 = fem::SurfaceMesh<f64>;
pub type SurfaceMesh32 = fem::SurfaceMesh<f32>;
