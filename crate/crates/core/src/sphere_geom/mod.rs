//! Spherical geometry of convex geodesic polygons, lunes and the
//! arc-bounded subregions used by the eigenvalue solver.

mod arc;
mod polygon;
mod region;
mod vec3;

pub use arc::{full_circle, sweep_about, CircleArc, HalfSpace};
pub use polygon::{
    gen_p_dichotomy, random_convex_polygon, AngleReport, Domain, GenPReport, Lune, SphericalPolygon, CONVEXITY_TOL,
};
pub use region::{BoundaryTag, RegionPiece, SphericalRegion};
pub use vec3::{tangent_frame, UnitVec, Vec3};
