use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::sphere_geom::{BoundaryTag, Domain, RegionPiece, SphericalRegion};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Front,
    Back,
}

/// A region on the double of `W`: one subregion of `W` per sheet.
///
/// Its boundary consists of the interior (Dirichlet-tagged) arcs of each
/// sheet plus the stretches of the seam `∂W` that are covered by exactly
/// one of the two sheets.
#[derive(Debug, Clone)]
pub struct DoubledRegion<T> {
    pub front: Option<SphericalRegion<T>>,
    pub back: Option<SphericalRegion<T>>,
}

impl<T: Real> DoubledRegion<T> {
    /// The same subregion on both sheets.
    pub fn both(r: SphericalRegion<T>) -> Self {
        Self { front: Some(r.clone()), back: Some(r) }
    }

    pub fn one_sheet(r: SphericalRegion<T>, sheet: Sheet) -> Self {
        match sheet {
            Sheet::Front => Self { front: Some(r), back: None },
            Sheet::Back => Self { front: None, back: Some(r) },
        }
    }

    fn sheets(&self) -> impl Iterator<Item = &SphericalRegion<T>> {
        self.front.iter().chain(self.back.iter())
    }

    pub fn area(&self) -> T {
        self.sheets().map(|r| r.area()).sum()
    }

    /// Length of the interior arcs on both sheets.
    pub fn interior_length(&self) -> T {
        self.sheets().map(|r| r.tagged_length(BoundaryTag::Dirichlet)).sum()
    }

    /// Length of the seam stretches covered by one sheet only.
    pub fn seam_length(&self, w: &Domain<T>) -> T {
        let base = w.boundary();
        let f = self.front.as_ref().map(|r| seam_intervals(r, &base)).unwrap_or_default();
        let b = self.back.as_ref().map(|r| seam_intervals(r, &base)).unwrap_or_default();
        let mut total = T::zero();
        let labels: std::collections::BTreeSet<&String> = f.keys().chain(b.keys()).collect();
        for label in labels {
            let fi = f.get(label).map(Vec::as_slice).unwrap_or(&[]);
            let bi = b.get(label).map(Vec::as_slice).unwrap_or(&[]);
            let lf: T = fi.iter().map(|&(s, e)| e - s).sum();
            let lb: T = bi.iter().map(|&(s, e)| e - s).sum();
            let mut overlap = T::zero();
            for &(s1, e1) in fi {
                for &(s2, e2) in bi {
                    overlap += (e1.min(e2) - s1.max(s2)).max(T::zero());
                }
            }
            total += lf + lb - overlap.twice();
        }
        total
    }

    pub fn length(&self, w: &Domain<T>) -> T {
        self.interior_length() + self.seam_length(w)
    }

    /// Every sheet region must be a closed loop inside `W`.
    pub fn validate(&self, w: &Domain<T>) -> Result<()> {
        let tol = lit::<T>(1e-9);
        for r in self.sheets() {
            if r.closure_gap() > tol {
                return Err(Error::ChartViolation("sheet boundary is not closed".into()));
            }
            for p in r.pieces() {
                for k in 0..=8 {
                    let q = p.arc.point(lit::<T>(k as f64) / lit(8.0));
                    if !w.contains(q, tol) {
                        return Err(Error::ChartViolation(format!("piece '{}' leaves the sheet", p.label)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Neumann pieces of `r` as `(label → [(start, end)])` distances along the
/// matching (geodesic) edge of `base`.
fn seam_intervals<T: Real>(r: &SphericalRegion<T>, base: &SphericalRegion<T>) -> BTreeMap<String, Vec<(T, T)>> {
    let mut out: BTreeMap<String, Vec<(T, T)>> = BTreeMap::new();
    for p in r.pieces().iter().filter(|p| p.tag == BoundaryTag::Neumann) {
        let Some(edge) = base.pieces().iter().find(|e: &&RegionPiece<T>| e.label == p.label) else {
            continue;
        };
        let s = edge.arc.start.distance(p.arc.start);
        out.entry(p.label.clone()).or_default().push((s, s + p.arc.length()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere_geom::{HalfSpace, Lune, SphericalPolygon, UnitVec};
    use std::f64::consts::PI;

    #[test]
    fn sector_pair_with_seam() {
        // octant: vertex angle π/2, sectors of radii r1 (front) and r2 (back)
        let tri = SphericalPolygon::new(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::<f64>::e_z()]).unwrap();
        let w = Domain::Polygon(tri.clone());
        let (r1, r2) = (0.3, 0.45);
        let sector = |r: f64| {
            tri.boundary(BoundaryTag::Neumann)
                .clip(&HalfSpace::cap(UnitVec::e_z(), r), BoundaryTag::Dirichlet, "arc")
                .unwrap()
        };
        let d = DoubledRegion { front: Some(sector(r1)), back: Some(sector(r2)) };
        d.validate(&w).unwrap();
        let th = PI / 2.0;
        let l = th * r1.sin() + th * r2.sin() + 2.0 * (r2 - r1);
        let area = th * (1.0 - r1.cos()) + th * (1.0 - r2.cos());
        assert!((d.length(&w) - l).abs() < 1e-12, "{} {l}", d.length(&w));
        assert!((d.area() - area).abs() < 1e-12);
    }

    #[test]
    fn doubled_lune_cap_is_latitude_circle() {
        let lune = Lune::new(0.4).unwrap();
        let w = Domain::Lune(lune);
        let b: f64 = 0.2;
        let r = lune
            .boundary(BoundaryTag::Neumann)
            .clip(&HalfSpace::above_latitude(b), BoundaryTag::Dirichlet, "lat")
            .unwrap();
        let d = DoubledRegion::both(r);
        assert!((d.length(&w) - 2.0 * PI * 0.4 * b.cos()).abs() < 1e-12);
        assert!((d.area() - 2.0 * PI * 0.4 * (1.0 - b.sin())).abs() < 1e-12);
        assert!(d.seam_length(&w).abs() < 1e-14);
    }

    #[test]
    fn region_outside_is_rejected() {
        let tri = SphericalPolygon::new(vec![UnitVec::e_x(), UnitVec::e_y(), UnitVec::<f64>::e_z()]).unwrap();
        let r = SphericalRegion::from_cap(&HalfSpace::cap(UnitVec::e_x(), 0.1), BoundaryTag::Dirichlet, "c");
        let d = DoubledRegion::one_sheet(r, Sheet::Front);
        assert!(matches!(d.validate(&Domain::Polygon(tri)), Err(Error::ChartViolation(_))));
    }
}
