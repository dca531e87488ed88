use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::arc::{CircleArc, HalfSpace};
use super::region::{BoundaryTag, RegionPiece, SphericalRegion};
use super::vec3::{tangent_frame, UnitVec, Vec3};

/// Sign tolerance of the convexity test.
pub const CONVEXITY_TOL: f64 = 1e-10;

/// Ordered vertex list of a geodesic polygon, counterclockwise seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalPolygon<T> {
    vertices: Vec<UnitVec<T>>,
}

impl<T: Real> SphericalPolygon<T> {
    /// Validates that consecutive vertices are distinct and non-antipodal.
    pub fn new(vertices: Vec<UnitVec<T>>) -> Result<Self> {
        let n = vertices.len();
        if n < 3 {
            return Err(Error::OutOfRange(format!("polygon needs at least 3 vertices, got {n}")));
        }
        for i in 0..n {
            let (p, q) = (vertices[i], vertices[(i + 1) % n]);
            let s = p.vec().cross(q.vec()).norm();
            if s < lit(1e-12) {
                return Err(Error::DegenerateEdge(format!(
                    "vertices {i} and {} coincide or are antipodal",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { vertices })
    }

    /// Polygon inscribed in the circle of `radius` about `center`, with
    /// vertices at the given increasing azimuths (measured in the tangent
    /// frame of `center`). Convex when every azimuth gap is below π.
    pub fn inscribed(center: UnitVec<T>, radius: T, azimuths: &[T]) -> Result<Self> {
        let (e1, e2) = tangent_frame(center);
        let (sr, cr) = radius.sin_cos();
        let vertices = azimuths
            .iter()
            .map(|&phi| {
                let v = center.vec().scale(cr) + (e1.scale(phi.cos()) + e2.scale(phi.sin())).scale(sr);
                UnitVec::from_vec(v).ok_or_else(|| Error::NonFinite("vertex".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new_convex(vertices)
    }

    /// Like [`new`](Self::new) but additionally requires geodesic convexity.
    pub fn new_convex(vertices: Vec<UnitVec<T>>) -> Result<Self> {
        let p = Self::new(vertices)?;
        p.check_convex()?;
        Ok(p)
    }

    pub fn vertices(&self) -> &[UnitVec<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex(&self, i: usize) -> UnitVec<T> {
        self.vertices[i % self.len()]
    }

    /// Outward-facing plane normal of edge `i` (from vertex `i` to `i+1`);
    /// the interior satisfies `p · n ≥ 0`.
    pub fn edge_normal(&self, i: usize) -> UnitVec<T> {
        let (p, q) = (self.vertex(i), self.vertex(i + 1));
        UnitVec::from_vec(p.vec().cross(q.vec())).expect("validated edge")
    }

    pub fn edge_half_spaces(&self) -> Vec<HalfSpace<T>> {
        (0..self.len()).map(|i| HalfSpace::new(self.edge_normal(i), T::zero())).collect()
    }

    /// Every vertex lies on the inner side of every edge plane and every turn is to the left.
    pub fn check_convex(&self) -> Result<()> {
        let tol = lit::<T>(CONVEXITY_TOL);
        let n = self.len();
        for i in 0..n {
            let normal = self.edge_normal(i).vec();
            for k in 0..n {
                if k == i || k == (i + 1) % n {
                    continue;
                }
                if normal.dot(self.vertices[k].vec()) < -tol {
                    return Err(Error::NotConvex(format!("vertex {k} lies outside edge {i}")));
                }
            }
        }
        for (i, th) in self.interior_angles().into_iter().enumerate() {
            if th >= T::PI() - tol {
                return Err(Error::NotConvex(format!("interior angle {i} is {th}")));
            }
        }
        Ok(())
    }

    /// Interior angles θ_i from the `atan2` of tangent components at each vertex.
    pub fn interior_angles(&self) -> Vec<T> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let v = self.vertices[i].vec();
                let next = self.vertices[(i + 1) % n].vec();
                let prev = self.vertices[(i + n - 1) % n].vec();
                let to_next = next - v.scale(next.dot(v));
                let to_prev = prev - v.scale(prev.dot(v));
                let y = v.dot(to_next.cross(to_prev));
                let x = to_next.dot(to_prev);
                let th = y.atan2(x);
                if th < T::zero() {
                    th + T::TAU()
                } else {
                    th
                }
            })
            .collect()
    }

    /// Spherical excess `Σθ_i − (n−2)π`.
    pub fn area(&self) -> T {
        let sum: T = self.interior_angles().into_iter().sum();
        sum - lit::<T>((self.len() - 2) as f64) * T::PI()
    }

    pub fn angle_report(&self) -> AngleReport<T> {
        let interior = self.interior_angles();
        let exterior: Vec<T> = interior.iter().map(|&t| T::PI() - t).collect();
        let sum: T = interior.iter().copied().sum();
        let area = sum - lit::<T>((self.len() - 2) as f64) * T::PI();
        let a = area / T::TAU();
        let min = interior.iter().copied().fold(T::infinity(), T::min);
        AngleReport { interior, exterior, area, a, delta: min - T::PI() * a }
    }

    /// δ(P): smallest interior angle minus that of the lune of equal area.
    pub fn delta(&self) -> T {
        self.angle_report().delta
    }

    pub fn contains(&self, p: UnitVec<T>, tol: T) -> bool {
        (0..self.len()).all(|i| self.edge_normal(i).vec().dot(p.vec()) >= -tol)
    }

    /// Normalized vertex mean; lies inside any convex polygon of area below 2π.
    pub fn centroid_direction(&self) -> UnitVec<T> {
        let s = self.vertices.iter().fold(Vec3::zero(), |acc, v| acc + v.vec());
        UnitVec::from_vec(s).expect("convex polygon has non-zero vertex sum")
    }

    pub fn boundary(&self, tag: BoundaryTag) -> SphericalRegion<T> {
        let pieces = (0..self.len())
            .map(|i| RegionPiece {
                arc: CircleArc::geodesic(self.vertex(i), self.vertex(i + 1)).expect("validated edge"),
                tag,
                label: format!("edge{i}"),
            })
            .collect();
        SphericalRegion::from_pieces(pieces)
    }
}

/// Random convex polygon with `n` vertices inscribed in a circle of random
/// centre and radius in `[0.2, 1.2]`; azimuth gaps stay below `0.9π`.
pub fn random_convex_polygon<T: Real, R: rand::Rng>(rng: &mut R, n: usize) -> SphericalPolygon<T> {
    loop {
        let z: f64 = rng.gen_range(-1.0..1.0);
        let lon: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let center = UnitVec::from_lat_lon(lit(z.asin()), lit(lon));
        let radius: f64 = rng.gen_range(0.2..1.2);
        let mut az: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
        az.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        let max_gap = az
            .windows(2)
            .map(|w| w[1] - w[0])
            .chain(std::iter::once(az[0] + std::f64::consts::TAU - az[n - 1]))
            .fold(0.0, f64::max);
        let min_gap = az.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if max_gap > 0.9 * std::f64::consts::PI || min_gap < 0.05 {
            continue;
        }
        let az: Vec<T> = az.into_iter().map(lit).collect();
        if let Ok(p) = SphericalPolygon::inscribed(center, lit(radius), &az) {
            return p;
        }
    }
}

/// Interior/exterior angle data of a convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleReport<T> {
    pub interior: Vec<T>,
    pub exterior: Vec<T>,
    pub area: T,
    /// `area / 2π`, the lune parameter of equal area.
    pub a: T,
    pub delta: T,
}

/// Spherical lune Ω_a between the meridians at longitude 0 and πa,
/// with vertices at the poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lune<T> {
    a: T,
}

impl<T: Real> Lune<T> {
    pub fn new(a: T) -> Result<Self> {
        if !(a > T::zero() && a <= T::one()) {
            return Err(Error::OutOfRange(format!("lune parameter a = {a} not in (0, 1]")));
        }
        Ok(Self { a })
    }

    pub fn a(&self) -> T {
        self.a
    }

    /// Dihedral angle πa, also the interior angle at both vertices.
    pub fn angle(&self) -> T {
        T::PI() * self.a
    }

    pub fn area(&self) -> T {
        T::TAU() * self.a
    }

    pub fn interior_angles(&self) -> [T; 2] {
        [self.angle(), self.angle()]
    }

    pub fn vertices(&self) -> [UnitVec<T>; 2] {
        [UnitVec::e_z(), UnitVec::e_z().antipode()]
    }

    pub fn delta(&self) -> T {
        T::zero()
    }

    /// The two meridian half-spaces. They coincide for the hemisphere `a = 1`.
    pub fn half_spaces(&self) -> [HalfSpace<T>; 2] {
        let (s, c) = self.angle().sin_cos();
        [
            HalfSpace::new(UnitVec::e_y(), T::zero()),
            HalfSpace::new(UnitVec::from_vec(Vec3::new(s, -c, T::zero())).expect("unit"), T::zero()),
        ]
    }

    pub fn contains(&self, p: UnitVec<T>, tol: T) -> bool {
        self.half_spaces().iter().all(|h| h.signed(p) >= -tol)
    }

    /// Counterclockwise boundary: north along longitude πa, south along longitude 0.
    pub fn boundary(&self, tag: BoundaryTag) -> SphericalRegion<T> {
        let south = UnitVec::e_z().antipode();
        let north = UnitVec::e_z();
        let east = UnitVec::from_lat_lon(T::zero(), self.angle());
        let west = UnitVec::e_x();
        // Axis of the meridian through `east`, oriented so travel is south → north.
        let east_axis = UnitVec::from_vec(east.vec().cross(north.vec())).expect("unit");
        let west_axis = UnitVec::from_vec(north.vec().cross(west.vec())).expect("unit");
        SphericalRegion::from_pieces(vec![
            RegionPiece {
                arc: CircleArc::new(east_axis, T::zero(), south, T::PI()),
                tag,
                label: "meridian-east".into(),
            },
            RegionPiece {
                arc: CircleArc::new(west_axis, T::zero(), north, T::PI()),
                tag,
                label: "meridian-west".into(),
            },
        ])
    }
}

/// Convex spherical region used as the ambient set `W`.
#[derive(Debug, Clone, PartialEq)]
pub enum Domain<T> {
    Polygon(SphericalPolygon<T>),
    Lune(Lune<T>),
}

impl<T: Real> Domain<T> {
    pub fn area(&self) -> T {
        match self {
            Domain::Polygon(p) => p.area(),
            Domain::Lune(l) => l.area(),
        }
    }

    /// Lune parameter of equal area, `area / 2π`.
    pub fn a(&self) -> T {
        self.area() / T::TAU()
    }

    pub fn interior_angles(&self) -> Vec<T> {
        match self {
            Domain::Polygon(p) => p.interior_angles(),
            Domain::Lune(l) => l.interior_angles().to_vec(),
        }
    }

    pub fn delta(&self) -> T {
        match self {
            Domain::Polygon(p) => p.delta(),
            Domain::Lune(l) => l.delta(),
        }
    }

    pub fn vertices(&self) -> Vec<UnitVec<T>> {
        match self {
            Domain::Polygon(p) => p.vertices().to_vec(),
            Domain::Lune(l) => l.vertices().to_vec(),
        }
    }

    pub fn contains(&self, p: UnitVec<T>, tol: T) -> bool {
        match self {
            Domain::Polygon(poly) => poly.contains(p, tol),
            Domain::Lune(l) => l.contains(p, tol),
        }
    }

    pub fn boundary(&self) -> SphericalRegion<T> {
        match self {
            Domain::Polygon(p) => p.boundary(BoundaryTag::Neumann),
            Domain::Lune(l) => l.boundary(BoundaryTag::Neumann),
        }
    }

    /// Boundary pieces as half-spaces, used to classify where a subset touches `∂W`.
    pub fn half_spaces(&self) -> Vec<HalfSpace<T>> {
        match self {
            Domain::Polygon(p) => p.edge_half_spaces(),
            Domain::Lune(l) => l.half_spaces().to_vec(),
        }
    }
}

/// The two split quantities of the angle dichotomy for a polygon of area 2πa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenPReport<T> {
    pub q1: T,
    pub q2: T,
    /// `max(q1, q2) ≥ a`.
    pub holds: bool,
}

/// Splits the (ordered) interior angles after index `m` and evaluates
/// `q1 = (Σ_{j≤m} θ_j − (m−1)π)/π` and `q2 = (Σ_{j>m} θ_j − (n−m−1)π)/π`.
/// Their sum is `2a` whenever the angles belong to a convex polygon of area `2πa`.
pub fn gen_p_dichotomy<T: Real>(angles: &[T], m: usize, a: T) -> Result<GenPReport<T>> {
    let n = angles.len();
    if m > n {
        return Err(Error::InvalidSplit { m, n });
    }
    let pi = T::PI();
    let head: T = angles[..m].iter().copied().sum();
    let tail: T = angles[m..].iter().copied().sum();
    let q1 = (head - (lit::<T>(m as f64) - T::one()) * pi) / pi;
    let q2 = (tail - (lit::<T>((n - m) as f64) - T::one()) * pi) / pi;
    let slack = T::epsilon() * lit((4 * (n + 2)) as f64);
    Ok(GenPReport { q1, q2, holds: q1.max(q2) >= a - slack })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn octant() -> SphericalPolygon<f64> {
        SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).unwrap()
    }

    #[test]
    fn octant_angles_and_area() {
        let p = octant();
        for th in p.interior_angles() {
            assert!((th - FRAC_PI_2).abs() < 1e-15);
        }
        assert!((p.area() - FRAC_PI_2).abs() < 1e-14);
        // a = 1/4, δ = π/2 − π/4
        assert!((p.delta() - PI / 4.0).abs() < 1e-14);
    }

    #[test]
    fn small_equilateral_triangle_tends_to_euclidean() {
        let r = 1e-4f64;
        let verts = (0..3)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / 3.0;
                UnitVec::new(r.sin() * phi.cos(), r.sin() * phi.sin(), r.cos()).unwrap()
            })
            .collect();
        let p = SphericalPolygon::new_convex(verts).unwrap();
        for th in p.interior_angles() {
            assert!((th - PI / 3.0).abs() < 1e-8);
        }
    }

    #[test]
    fn clockwise_polygon_is_not_convex() {
        let p = SphericalPolygon::<f64>::new(vec![UnitVec::e_x(), UnitVec::e_z(), UnitVec::e_y()]).unwrap();
        assert!(matches!(p.check_convex(), Err(Error::NotConvex(_))));
    }

    #[test]
    fn degenerate_edges_rejected() {
        let e = UnitVec::<f64>::e_x();
        assert!(matches!(SphericalPolygon::new(vec![e, e, UnitVec::e_y()]), Err(Error::DegenerateEdge(_))));
        assert!(matches!(SphericalPolygon::new(vec![e, e.antipode(), UnitVec::e_y()]), Err(Error::DegenerateEdge(_))));
    }

    #[test]
    fn lune_descriptor() {
        assert!(Lune::new(0.0).is_err());
        assert!(Lune::new(1.2).is_err());
        assert!((Lune::new(1.0).unwrap().area() - 2.0 * PI).abs() < 1e-15);
        assert!((Lune::new(0.5).unwrap().area() - PI).abs() < 1e-15);
        let q = Lune::new(0.25).unwrap().interior_angles();
        assert!((q[0] - PI / 4.0).abs() < 1e-15 && (q[1] - PI / 4.0).abs() < 1e-15);
        assert_eq!(Lune::new(0.3).unwrap().delta(), 0.0);
    }

    #[test]
    fn lune_boundary_area_matches() {
        for a in [0.25, 0.5, 0.9, 1.0] {
            let l = Lune::new(a).unwrap();
            let area = l.boundary(BoundaryTag::Neumann).area();
            assert!((area - 2.0 * PI * a).abs() < 1e-13, "a = {a}: {area}");
        }
    }

    #[test]
    fn gen_p_octant_examples() {
        let angles = [FRAC_PI_2; 3];
        let r = gen_p_dichotomy(&angles, 0, 0.25).unwrap();
        assert!((r.q1 - 1.0).abs() < 1e-15);
        assert!((r.q2 + 0.5).abs() < 1e-15);
        assert!(r.holds);
        assert!(matches!(gen_p_dichotomy(&angles, 4, 0.25), Err(Error::InvalidSplit { m: 4, n: 3 })));
    }

    #[test]
    fn gen_p_lune_equality() {
        let a = 0.37;
        let r = gen_p_dichotomy(&[PI * a, PI * a], 1, a).unwrap();
        assert!((r.q1 - a).abs() < 1e-15 && (r.q2 - a).abs() < 1e-15);
        assert!(r.holds);
    }
}
