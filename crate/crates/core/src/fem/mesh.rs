//! Triangulation of spherical regions.
//!
//! Boundary arcs are sampled at spacing `h` (`h/2` on non-geodesic arcs),
//! interior points come from a Fibonacci lattice of matching density
//! centred on the region, and the points are joined by a constrained
//! Delaunay triangulation of their stereographic image. Stereographic
//! projection maps circles to circles, so the planar empty-circle property
//! is the spherical one.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{self, Write};

use spade::{ConstrainedDelaunayTriangulation, Point2, Triangulation};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::sphere_geom::{tangent_frame, BoundaryTag, SphericalRegion, UnitVec, Vec3};

/// Smallest triangle angle accepted, in degrees.
pub const MIN_ANGLE_DEG: f64 = 15.0;
const SMOOTHING_PASSES: usize = 5;
const REFINE_RATIO: f64 = 1.2;
const REFINE_ROUNDS: usize = 3;
/// Interior lattice points closer than this many `h` to the boundary are dropped.
const BOUNDARY_CLEARANCE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh<T> {
    pub vertices: Vec<UnitVec<T>>,
    /// Counterclockwise seen from outside the sphere.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<BoundaryEdge>,
    /// Vertices on the closure of the Dirichlet boundary.
    pub dirichlet: Vec<bool>,
    /// Longest edge.
    pub h: T,
}

fn angles<T: Real>(p: [Vec3<T>; 3]) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for i in 0..3 {
        let a = p[(i + 1) % 3] - p[i];
        let b = p[(i + 2) % 3] - p[i];
        out[i] = a.cross(b).norm().atan2(a.dot(b));
    }
    out
}

fn oriented_area<T: Real>(p: [Vec3<T>; 3]) -> T {
    let n = (p[1] - p[0]).cross(p[2] - p[0]);
    let c = p[0] + p[1] + p[2];
    n.norm().copysign(n.dot(c)) * T::half()
}

impl<T: Real> SurfaceMesh<T> {
    fn corners(&self, t: usize) -> [Vec3<T>; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a].vec(), self.vertices[b].vec(), self.vertices[c].vec()]
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> T {
        (0..self.triangles.len())
            .map(|t| angles(self.corners(t)).into_iter().fold(T::infinity(), T::min))
            .fold(T::infinity(), T::min)
    }

    /// Total area of the flat triangles.
    pub fn area(&self) -> T {
        (0..self.triangles.len()).map(|t| oriented_area(self.corners(t))).sum()
    }

    pub fn max_edge(&self) -> T {
        let mut h = T::zero();
        for t in &self.triangles {
            for i in 0..3 {
                h = h.max((self.vertices[t[i]].vec() - self.vertices[t[(i + 1) % 3]].vec()).norm());
            }
        }
        h
    }

    pub fn has_dirichlet(&self) -> bool {
        self.dirichlet.iter().any(|&d| d)
    }

    /// ASCII `OFF` followed by a `BOUNDARY` block of tagged edges.
    pub fn write_off<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "OFF")?;
        writeln!(out, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            let [x, y, z] = v.vec().to_array();
            writeln!(out, "{:.17e} {:.17e} {:.17e}", x.to_f64_lossy(), y.to_f64_lossy(), z.to_f64_lossy())?;
        }
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        writeln!(out, "BOUNDARY {}", self.boundary.len())?;
        for e in &self.boundary {
            let tag = match e.tag {
                BoundaryTag::Dirichlet => "dirichlet",
                BoundaryTag::Neumann => "neumann",
            };
            writeln!(out, "{} {} {}", e.a, e.b, tag)?;
        }
        Ok(())
    }
}

/// Meshes `region` with target edge length `h`.
pub fn mesh_spherical_region<T: Real>(region: &SphericalRegion<T>, h: T) -> Result<SurfaceMesh<T>> {
    let hf = h.to_f64_lossy();
    if !(hf > 1e-3 && hf < 0.3) {
        return Err(Error::OutOfRange(format!("mesh size h = {hf} outside (1e-3, 0.3)")));
    }
    if region.closure_gap() > lit::<T>(1e-9).max(T::epsilon() * lit(100.0)) {
        return Err(Error::BadRegionSpec("region boundary is not closed".into()));
    }
    let center = region.center();
    let (e1, e2) = tangent_frame(center);
    let c = center.vec();

    // Boundary samples; vertex k starts boundary edge k.
    let mut points: Vec<Vec3<T>> = Vec::new();
    let mut edge_tags: Vec<BoundaryTag> = Vec::new();
    let pieces = region.pieces();
    for p in pieces {
        let len = p.arc.length();
        if len < lit(1e-12) {
            continue;
        }
        let spacing = if p.arc.is_geodesic() { h } else { h * T::half() };
        let n = (len / spacing).ceil().to_usize().unwrap_or(1).max(1);
        for j in 0..n {
            points.push(p.arc.point(lit::<T>(j as f64) / lit(n as f64)).vec());
            edge_tags.push(p.tag);
        }
    }
    let nb = points.len();
    if nb < 3 {
        return Err(Error::BadRegionSpec("region boundary is too short to mesh".into()));
    }
    let mut dirichlet = vec![false; nb];
    for k in 0..nb {
        if edge_tags[k] == BoundaryTag::Dirichlet {
            dirichlet[k] = true;
            dirichlet[(k + 1) % nb] = true;
        }
    }

    // Interior: Fibonacci lattice about the centre, restricted to the region.
    let reach = points.iter().map(|p| p.dot(c).max(-T::one()).min(T::one()).acos()).fold(T::zero(), T::max);
    if reach > lit(0.95 * std::f64::consts::PI) {
        return Err(Error::BadRegionSpec("region too large for a single chart".into()));
    }
    let cell = lit::<T>(3f64.sqrt() / 2.0) * h * h;
    let total = (lit::<T>(4.0) * T::PI() / cell).ceil();
    let zmin = (reach + h).min(T::PI()).cos();
    let golden = T::PI() * (lit::<T>(3.0) - lit::<T>(5.0).sqrt());
    let clearance = lit::<T>(BOUNDARY_CLEARANCE) * h;
    let chord_clear = (clearance * T::half()).sin().twice();
    let boundary_pts = points.clone();
    let mut i = 0usize;
    loop {
        let z = T::one() - (lit::<T>(2.0 * i as f64) + T::one()) / total;
        if z < zmin {
            break;
        }
        let r = (T::one() - z * z).max(T::zero()).sqrt();
        let phi = golden * lit(i as f64);
        let p = c.scale(z) + (e1.scale(phi.cos()) + e2.scale(phi.sin())).scale(r);
        i += 1;
        let Some(u) = UnitVec::from_vec(p) else { continue };
        if !region.contains_convex(u, T::zero()) {
            continue;
        }
        if boundary_pts.iter().any(|q| (*q - u.vec()).norm() < chord_clear) {
            continue;
        }
        points.push(u.vec());
        dirichlet.push(false);
    }

    // Constrained Delaunay in the stereographic chart from −centre.
    let chart = |p: Vec3<T>| {
        let d = T::one() + p.dot(c);
        Point2::new((p.dot(e1).twice() / d).to_f64_lossy(), (p.dot(e2).twice() / d).to_f64_lossy())
    };
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> = ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(points.len());
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    for (k, p) in points.iter().enumerate() {
        let hnd = cdt.insert(chart(*p)).map_err(|e| Error::MeshQualityFailure(format!("insertion failed: {e:?}")))?;
        if owner.insert(hnd.index(), k).is_some() {
            return Err(Error::MeshQualityFailure("coincident mesh points".into()));
        }
        handles.push(hnd);
    }
    let outline: Vec<Point2<f64>> = points[..nb].iter().map(|p| chart(*p)).collect();
    for k in 0..nb {
        let (a, b) = (handles[k], handles[(k + 1) % nb]);
        if !cdt.can_add_constraint(a, b) {
            return Err(Error::MeshQualityFailure("boundary edges intersect in the chart".into()));
        }
        cdt.add_constraint(a, b);
    }

    let inner = |cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>, owner: &BTreeMap<usize, usize>| {
        let mut out = Vec::new();
        for f in cdt.inner_faces() {
            let vs = f.vertices();
            let q = f.positions();
            let g = Point2::new((q[0].x + q[1].x + q[2].x) / 3.0, (q[0].y + q[1].y + q[2].y) / 3.0);
            if inside_loop(&outline, g) {
                out.push([owner[&vs[0].fix().index()], owner[&vs[1].fix().index()], owner[&vs[2].fix().index()]]);
            }
        }
        out
    };

    // Fill the gaps left by the boundary clearance: split triangles with a long edge at their centroid.
    let long = lit::<T>(REFINE_RATIO) * h;
    for _ in 0..REFINE_ROUNDS {
        let extra: Vec<Vec3<T>> = inner(&cdt, &owner)
            .into_iter()
            .filter(|t| (0..3).any(|i| (points[t[i]] - points[t[(i + 1) % 3]]).norm() > long))
            .map(|t| points[t[0]] + points[t[1]] + points[t[2]])
            .filter_map(|g| g.normalized())
            .collect();
        if extra.is_empty() {
            break;
        }
        for p in extra {
            let hnd =
                cdt.insert(chart(p)).map_err(|e| Error::MeshQualityFailure(format!("insertion failed: {e:?}")))?;
            if owner.insert(hnd.index(), points.len()).is_none() {
                points.push(p);
                dirichlet.push(false);
            }
        }
    }

    let mut triangles: Vec<[usize; 3]> =
        inner(&cdt, &owner)
            .into_iter()
            .map(|t| {
                if oriented_area([points[t[0]], points[t[1]], points[t[2]]]) > T::zero() {
                    t
                } else {
                    [t[0], t[2], t[1]]
                }
            })
            .collect();

    let mut present: BTreeSet<(usize, usize)> = BTreeSet::new();
    for t in &triangles {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            present.insert((a.min(b), a.max(b)));
        }
    }
    let mut boundary = Vec::with_capacity(nb);
    for k in 0..nb {
        let (a, b) = (k, (k + 1) % nb);
        if !present.contains(&(a.min(b), a.max(b))) {
            return Err(Error::MeshQualityFailure(format!("boundary edge {a}-{b} missing from triangulation")));
        }
        boundary.push(BoundaryEdge { a, b, tag: edge_tags[k] });
    }

    // Drop lattice points that ended up in no triangle.
    let mut used = vec![false; points.len()];
    for t in &triangles {
        for &v in t {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; points.len()];
    let mut vertices = Vec::new();
    let mut dir = Vec::new();
    for (k, p) in points.iter().enumerate() {
        if used[k] || k < nb {
            remap[k] = vertices.len();
            vertices.push(UnitVec::from_vec(*p).expect("unit"));
            dir.push(dirichlet[k]);
        }
    }
    for t in &mut triangles {
        for v in t.iter_mut() {
            *v = remap[*v];
        }
    }

    let mut mesh = SurfaceMesh { vertices, triangles, boundary, dirichlet: dir, h: T::zero() };
    smooth(&mut mesh, nb);
    let min_angle = mesh.min_angle().to_degrees();
    if min_angle < lit(MIN_ANGLE_DEG) {
        return Err(Error::MeshQualityFailure(format!("minimum angle {min_angle:.2}° below {MIN_ANGLE_DEG}°")));
    }
    mesh.h = mesh.max_edge();
    Ok(mesh)
}

/// Even-odd test against the chart image of the boundary samples.
fn inside_loop(outline: &[Point2<f64>], p: Point2<f64>) -> bool {
    let n = outline.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (outline[i], outline[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) && p.x < a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y) {
            inside = !inside;
        }
    }
    inside
}

/// Laplacian smoothing of interior vertices, projected to the sphere; a
/// move is kept only if it does not lower the smallest incident angle.
fn smooth<T: Real>(mesh: &mut SurfaceMesh<T>, fixed: usize) {
    let n = mesh.vertices.len();
    let mut nbrs: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ti, t) in mesh.triangles.iter().enumerate() {
        for i in 0..3 {
            nbrs[t[i]].insert(t[(i + 1) % 3]);
            nbrs[t[i]].insert(t[(i + 2) % 3]);
            incident[t[i]].push(ti);
        }
    }
    let worst = |m: &SurfaceMesh<T>, v: usize| -> T {
        incident[v]
            .iter()
            .map(|&t| {
                let c = m.corners(t);
                if oriented_area(c) <= T::zero() {
                    T::neg_infinity()
                } else {
                    angles(c).into_iter().fold(T::infinity(), T::min)
                }
            })
            .fold(T::infinity(), T::min)
    };
    for _ in 0..SMOOTHING_PASSES {
        for v in fixed..n {
            let s = nbrs[v].iter().fold(Vec3::zero(), |acc, &u| acc + mesh.vertices[u].vec());
            let Some(target) = UnitVec::from_vec(s) else { continue };
            let before = worst(mesh, v);
            let old = mesh.vertices[v];
            mesh.vertices[v] = target;
            if worst(mesh, v) < before {
                mesh.vertices[v] = old;
            }
        }
    }
}

/// Icosahedron refined `level` times with midpoints projected to the sphere.
pub fn icosphere<T: Real>(level: usize) -> SurfaceMesh<T> {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut vertices: Vec<UnitVec<T>> =
        raw.iter().map(|p| UnitVec::from_vec(Vec3::new(lit(p[0]), lit(p[1]), lit(p[2]))).expect("non-zero")).collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for t in &triangles {
            let mut m = [0usize; 3];
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[i] = *mid.entry(key).or_insert_with(|| {
                    vertices.push(UnitVec::from_vec(vertices[a].vec() + vertices[b].vec()).expect("non-antipodal"));
                    vertices.len() - 1
                });
            }
            next.push([t[0], m[0], m[2]]);
            next.push([t[1], m[1], m[0]]);
            next.push([t[2], m[2], m[1]]);
            next.push(m);
        }
        triangles = next;
    }
    let n = vertices.len();
    let mut mesh = SurfaceMesh { vertices, triangles, boundary: Vec::new(), dirichlet: vec![false; n], h: T::zero() };
    mesh.h = mesh.max_edge();
    mesh
}
