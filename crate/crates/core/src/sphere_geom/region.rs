use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::arc::{full_circle, sweep_about, CircleArc, HalfSpace};
use super::vec3::{UnitVec, Vec3};

/// Boundary condition carried by a piece of region boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryTag {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionPiece<T> {
    pub arc: CircleArc<T>,
    pub tag: BoundaryTag,
    pub label: String,
}

/// Simply connected spherical region bounded by one closed counterclockwise
/// loop of circle arcs (geodesics, latitude arcs, geodesic-circle arcs).
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalRegion<T> {
    pieces: Vec<RegionPiece<T>>,
}

const CLIP_TOL: f64 = 1e-12;

impl<T: Real> SphericalRegion<T> {
    pub fn from_pieces(pieces: Vec<RegionPiece<T>>) -> Self {
        Self { pieces }
    }

    /// The cap `h` as a region bounded by a single circle.
    pub fn from_cap(h: &HalfSpace<T>, tag: BoundaryTag, label: &str) -> Self {
        Self::from_pieces(vec![RegionPiece { arc: full_circle(h), tag, label: label.into() }])
    }

    pub fn pieces(&self) -> &[RegionPiece<T>] {
        &self.pieces
    }

    /// Maximum gap between consecutive piece endpoints; zero for a well-formed loop.
    pub fn closure_gap(&self) -> T {
        let n = self.pieces.len();
        (0..n)
            .map(|i| {
                let e = self.pieces[i].arc.end();
                let s = self.pieces[(i + 1) % n].arc.start;
                (e.vec() - s.vec()).norm()
            })
            .fold(T::zero(), T::max)
    }

    /// Signed turning angles at the junctions (junction `i` ends piece `i`).
    pub fn corner_turns(&self) -> Vec<T> {
        let n = self.pieces.len();
        (0..n)
            .map(|i| {
                let a = &self.pieces[i].arc;
                let b = &self.pieces[(i + 1) % n].arc;
                let p = b.start.vec();
                let tin = a.unit_tangent(T::one());
                let tout = b.unit_tangent(T::zero());
                p.dot(tin.cross(tout)).atan2(tin.dot(tout))
            })
            .collect()
    }

    /// Interior angles at the junctions, `π − turn`.
    pub fn corner_angles(&self) -> Vec<T> {
        self.corner_turns().into_iter().map(|t| T::PI() - t).collect()
    }

    /// Area by Gauss-Bonnet: `2π − Σ turns − Σ ∫ k_g`.
    pub fn area(&self) -> T {
        let turns: T = self.corner_turns().into_iter().sum();
        let kg: T = self.pieces.iter().map(|p| p.arc.turning()).sum();
        T::TAU() - turns - kg
    }

    pub fn perimeter(&self) -> T {
        self.pieces.iter().map(|p| p.arc.length()).sum()
    }

    pub fn tagged_length(&self, tag: BoundaryTag) -> T {
        self.pieces.iter().filter(|p| p.tag == tag).map(|p| p.arc.length()).sum()
    }

    pub fn has_tag(&self, tag: BoundaryTag) -> bool {
        self.pieces.iter().any(|p| p.tag == tag)
    }

    /// Normalized mean of densely sampled boundary points.
    pub fn center(&self) -> UnitVec<T> {
        let mut s = Vec3::zero();
        for p in &self.pieces {
            let k = 64;
            for j in 0..k {
                let t = (lit::<T>(j as f64) + T::half()) / lit(k as f64);
                s += p.arc.point(t).vec().scale(p.arc.length() / lit(k as f64));
            }
        }
        match UnitVec::from_vec(s) {
            Some(c) => c,
            // Symmetric loops (a full great circle) have zero mean; use the left normal instead.
            None => self.pieces[0].arc.axis,
        }
    }

    /// Intersection with the half-space `h`; new boundary arcs receive `tag`.
    ///
    /// Several exits are accepted when `h` is a convex cap (`offset ≥ 0`): the
    /// intersection with a convex region is then convex. Otherwise the loop
    /// may leave `h` only once.
    pub fn clip(&self, h: &HalfSpace<T>, tag: BoundaryTag, label: &str) -> Result<Self> {
        let tol = lit::<T>(CLIP_TOL);
        // Split every piece at its crossings and classify sub-pieces by midpoint.
        let mut parts: Vec<(RegionPiece<T>, bool)> = Vec::new();
        for p in &self.pieces {
            let mut ts = vec![T::zero()];
            ts.extend(p.arc.crossings(h));
            ts.push(T::one());
            for w in ts.windows(2) {
                let sub = p.arc.sub_arc(w[0], w[1]);
                let inside = h.signed(sub.point(T::half())) >= -tol;
                parts.push((RegionPiece { arc: sub, tag: p.tag, label: p.label.clone() }, inside));
            }
        }
        if parts.iter().all(|(_, inside)| *inside) {
            return Ok(self.clone());
        }
        if parts.iter().all(|(_, inside)| !*inside) {
            // Either the whole cap lies inside the region, or the intersection is empty.
            let probe = full_circle(h).point(T::zero());
            if self.contains_convex(probe, tol) {
                return Ok(Self::from_cap(h, tag, label));
            }
            return Err(Error::BadRegionSpec("clip removes the entire region".into()));
        }
        // Rotate so that the list starts with the first inside part after an outside one.
        let n = parts.len();
        let start =
            (0..n).find(|&i| parts[i].1 && !parts[(i + n - 1) % n].1).expect("mixed classification has an entry");
        parts.rotate_left(start);
        let transitions = (0..n).filter(|&i| parts[i].1 != parts[(i + 1) % n].1).count();
        if transitions != 2 && h.offset < -tol {
            return Err(Error::BadRegionSpec(format!(
                "clip produces a disconnected region ({} boundary crossings)",
                transitions
            )));
        }
        // Each outside run is replaced by the arc of the cutting circle from its exit to the next entry.
        let mut pieces: Vec<RegionPiece<T>> = Vec::new();
        let mut exit = None;
        for i in 0..n {
            let (p, inside) = &parts[i];
            if *inside {
                pieces.push(p.clone());
                continue;
            }
            if exit.is_none() {
                exit = Some(p.arc.start);
            }
            if parts[(i + 1) % n].1 {
                let from = exit.take().expect("run has an exit");
                let to = parts[(i + 1) % n].0.arc.start;
                let sweep = sweep_about(h.normal, from, to);
                pieces.push(RegionPiece {
                    arc: CircleArc::new(h.normal, h.offset, from, sweep),
                    tag,
                    label: label.into(),
                });
            }
        }
        Ok(Self::from_pieces(pieces))
    }

    /// Membership test valid when every piece bounds the region from the left
    /// within a convex intersection of caps (the regions produced by clipping).
    pub fn contains_convex(&self, p: UnitVec<T>, tol: T) -> bool {
        self.pieces.iter().all(|piece| {
            let a = piece.arc;
            let hs = if a.sweep >= T::zero() {
                HalfSpace::new(a.axis, a.cos_radius)
            } else {
                HalfSpace::new(a.axis, a.cos_radius).complement()
            };
            hs.signed(p) >= -tol
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_geom::polygon::{Lune, SphericalPolygon};
    use std::f64::consts::PI;

    #[test]
    fn lune_clipped_at_latitude_has_cap_half_area() {
        for (a, b) in [(0.5, 0.3), (1.0, 0.0), (0.25, -0.4), (0.8, 1.1)] {
            let lune = Lune::new(a).unwrap();
            let r = lune
                .boundary(BoundaryTag::Neumann)
                .clip(&HalfSpace::above_latitude(b), BoundaryTag::Dirichlet, "latitude")
                .unwrap();
            assert_eq!(r.pieces().len(), 3);
            assert!(r.closure_gap() < 1e-14);
            let expect = PI * a * (1.0 - f64::sin(b));
            assert!((r.area() - expect).abs() < 1e-13, "a={a} b={b}: {} vs {expect}", r.area());
            assert!((r.tagged_length(BoundaryTag::Dirichlet) - PI * a * b.cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn octant_sector_about_vertex() {
        let oct = SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).unwrap();
        let r = 0.6f64;
        let v = oct
            .boundary(BoundaryTag::Neumann)
            .clip(&HalfSpace::cap(UnitVec::e_z(), r), BoundaryTag::Dirichlet, "disc")
            .unwrap();
        // sector of angle π/2 and radius r: (π/2)(1 − cos r)
        assert!((v.area() - PI / 2.0 * (1.0 - r.cos())).abs() < 1e-13);
        assert!(v.closure_gap() < 1e-14);
    }

    #[test]
    fn interior_disc_becomes_full_circle() {
        let oct = SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).unwrap();
        let c = oct.centroid_direction();
        let v =
            oct.boundary(BoundaryTag::Neumann).clip(&HalfSpace::cap(c, 0.2), BoundaryTag::Dirichlet, "disc").unwrap();
        assert_eq!(v.pieces().len(), 1);
        assert!(!v.has_tag(BoundaryTag::Neumann));
        assert!((v.area() - 2.0 * PI * (1.0 - 0.2f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn disc_crossing_every_edge() {
        use rand::{Rng, SeedableRng};
        let oct = SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).unwrap();
        let h = HalfSpace::cap(oct.centroid_direction(), 0.8);
        let v = oct.boundary(BoundaryTag::Neumann).clip(&h, BoundaryTag::Dirichlet, "disc").unwrap();
        assert_eq!(v.pieces().len(), 6);
        assert!(v.closure_gap() < 1e-14);
        // Monte-Carlo oracle
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let z: f64 = rng.gen_range(-1.0..1.0);
            let lon: f64 = rng.gen_range(0.0..2.0 * PI);
            let p = UnitVec::from_lat_lon(z.asin(), lon);
            if oct.contains(p, 0.0) && h.signed(p) >= 0.0 {
                hits += 1;
            }
        }
        let frac = hits as f64 / n as f64;
        let sigma = (frac * (1.0 - frac) / n as f64).sqrt() * 4.0 * PI;
        assert!((v.area() - frac * 4.0 * PI).abs() < 4.0 * sigma, "{} vs {}", v.area(), frac * 4.0 * PI);
    }

    #[test]
    fn empty_clip_is_rejected() {
        let oct = SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).unwrap();
        let far = oct.centroid_direction().antipode();
        assert!(oct
            .boundary(BoundaryTag::Neumann)
            .clip(&HalfSpace::cap(far, 0.1), BoundaryTag::Dirichlet, "disc")
            .is_err());
    }

    #[test]
    fn complementary_clips_partition_area() {
        let oct = SphericalPolygon::new_convex(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::e_z()]).unwrap();
        let h = HalfSpace::new(UnitVec::new(0.0, -0.6, 0.8).unwrap(), 0.0);
        let w = oct.boundary(BoundaryTag::Neumann);
        let v1 = w.clip(&h, BoundaryTag::Dirichlet, "cut").unwrap();
        let v2 = w.clip(&h.complement(), BoundaryTag::Dirichlet, "cut").unwrap();
        assert!((v1.area() + v2.area() - PI / 2.0).abs() < 1e-13);
    }
}
