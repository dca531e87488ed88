//! Mixed Dirichlet-Neumann eigenvalues on subsets of convex spherical regions.
//!
//! A subset `V ⊂ W` is described by cutting `W` with caps. Pieces of `∂W`
//! that survive carry Neumann data, the cut arcs carry Dirichlet data; both
//! can be overridden by label in a [`RegionSpec`].

mod assemble;
mod mesh;
mod solve;

pub use assemble::{assemble, element_matrices, AssembledSystem, CsrMatrix};
pub use mesh::{icosphere, mesh_spherical_region, BoundaryEdge, SurfaceMesh, MIN_ANGLE_DEG};
pub use solve::{
    first_nonzero_eigenvalue, rayleigh_quotient, rcm_order, smallest_eigenvalue, EigenSolution, SkylineCholesky,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};
use crate::spectral::{char_exponent, EigenResult, Method};
use crate::sphere_geom::{BoundaryTag, Domain, HalfSpace, Lune, SphericalPolygon, SphericalRegion, UnitVec};

/// Coarse level of the two-level error estimate is `min(2h, COARSE_CAP)`.
const COARSE_CAP: f64 = 0.29;
const CONTAIN_TOL: f64 = 1e-9;

/// The ambient convex region in input form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WSpec {
    Lune { a: f64 },
    Polygon { vertices: Vec<[f64; 3]> },
}

/// The subset `V`, always intersected with `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VSpec {
    /// `{lat ≥ b}`, or `{lat ≤ b}` when `below`.
    LatitudeCap {
        b: f64,
        #[serde(default)]
        below: bool,
    },
    GeodesicDisc {
        center: [f64; 3],
        radius: f64,
    },
    /// `{p : p·normal ≥ offset}`.
    HalfSpace {
        normal: [f64; 3],
        offset: f64,
    },
    /// Convex polygon inside `W`, counterclockwise.
    Polyline {
        points: Vec<[f64; 3]>,
    },
    Whole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSpec {
    #[serde(rename = "W")]
    pub w: WSpec,
    #[serde(rename = "V")]
    pub v: VSpec,
    /// Boundary labels forced to Dirichlet.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dirichlet: Vec<String>,
    /// Boundary labels forced to Neumann.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub neumann: Vec<String>,
}

fn unit<T: Real>(p: [f64; 3]) -> Result<UnitVec<T>> {
    UnitVec::new(lit(p[0]), lit(p[1]), lit(p[2])).map_err(|e| Error::BadRegionSpec(format!("point {p:?}: {e}")))
}

impl WSpec {
    pub fn domain<T: Real>(&self) -> Result<Domain<T>> {
        Ok(match self {
            WSpec::Lune { a } => Domain::Lune(Lune::new(lit(*a))?),
            WSpec::Polygon { vertices } => {
                let vs = vertices.iter().map(|p| unit(*p)).collect::<Result<Vec<_>>>()?;
                Domain::Polygon(SphericalPolygon::new_convex(vs)?)
            }
        })
    }
}

impl VSpec {
    /// Half-spaces cutting `W` down to `V`, each with the label of its arc.
    pub fn cuts<T: Real>(&self, w: &Domain<T>) -> Result<Vec<(HalfSpace<T>, String)>> {
        let inside = |p: UnitVec<T>, what: &str| {
            if w.contains(p, lit(CONTAIN_TOL)) {
                Ok(())
            } else {
                Err(Error::BadRegionSpec(format!("{what} lies outside W")))
            }
        };
        Ok(match self {
            VSpec::Whole => Vec::new(),
            VSpec::LatitudeCap { b, below } => {
                let h = HalfSpace::above_latitude(lit::<T>(*b));
                vec![(if *below { h.complement() } else { h }, "latitude".into())]
            }
            VSpec::GeodesicDisc { center, radius } => {
                let c = unit::<T>(*center)?;
                inside(c, "disc centre")?;
                if !(*radius > 0.0 && *radius < std::f64::consts::PI) {
                    return Err(Error::BadRegionSpec(format!("disc radius {radius}")));
                }
                vec![(HalfSpace::cap(c, lit(*radius)), "disc".into())]
            }
            VSpec::HalfSpace { normal, offset } => vec![(HalfSpace::new(unit(*normal)?, lit(*offset)), "cut".into())],
            VSpec::Polyline { points } => {
                let vs = points.iter().map(|p| unit::<T>(*p)).collect::<Result<Vec<_>>>()?;
                for (i, p) in vs.iter().enumerate() {
                    inside(*p, &format!("polyline point {i}"))?;
                }
                let poly = SphericalPolygon::new_convex(vs).map_err(|e| Error::BadRegionSpec(e.to_string()))?;
                poly.edge_half_spaces().into_iter().enumerate().map(|(i, h)| (h, format!("polyline{i}"))).collect()
            }
        })
    }
}

impl RegionSpec {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::BadRegionSpec(e.to_string()))
    }

    pub fn region<T: Real>(&self) -> Result<SphericalRegion<T>> {
        build_region(&self.w.domain()?, &self.v, &self.dirichlet, &self.neumann)
    }
}

/// `V` as a tagged region: `∂W` Neumann, cut arcs Dirichlet, then overrides.
pub fn build_region<T: Real>(
    w: &Domain<T>,
    v: &VSpec,
    dirichlet: &[String],
    neumann: &[String],
) -> Result<SphericalRegion<T>> {
    let mut region = w.boundary();
    for (h, label) in v.cuts(w)? {
        region = region.clip(&h, BoundaryTag::Dirichlet, &label)?;
    }
    if let Some(l) = dirichlet.iter().find(|l| neumann.contains(l)) {
        return Err(Error::BadRegionSpec(format!("label {l} is both Dirichlet and Neumann")));
    }
    let labels: Vec<String> = region.pieces().iter().map(|p| p.label.clone()).collect();
    for l in dirichlet.iter().chain(neumann) {
        if !labels.contains(l) {
            return Err(Error::BadRegionSpec(format!("unknown boundary label {l}; available: {}", labels.join(", "))));
        }
    }
    let pieces = region
        .pieces()
        .iter()
        .cloned()
        .map(|mut p| {
            if dirichlet.contains(&p.label) {
                p.tag = BoundaryTag::Dirichlet;
            } else if neumann.contains(&p.label) {
                p.tag = BoundaryTag::Neumann;
            }
            p
        })
        .collect();
    Ok(SphericalRegion::from_pieces(pieces))
}

pub fn mesh_region<T: Real>(w: &Domain<T>, v: &VSpec, h: T) -> Result<SurfaceMesh<T>> {
    mesh_spherical_region(&build_region(w, v, &[], &[])?, h)
}

/// `μ_h(V)` at mesh size `h`.
pub fn region_eigenvalue<T: Real>(region: &SphericalRegion<T>, h: T, tol: T) -> Result<EigenSolution<T>> {
    let mesh = mesh_spherical_region(region, h)?;
    smallest_eigenvalue(&assemble(&mesh)?, tol)
}

/// `μ_h(V)` with the error estimated from a second, coarser mesh assuming
/// second-order convergence.
pub fn region_dn_eigenvalue<T: Real>(region: &SphericalRegion<T>, h: T, tol: T) -> Result<EigenResult<T>> {
    let fine = region_eigenvalue(region, h, tol)?;
    let hc = (h.twice()).min(lit(COARSE_CAP)).max(h * lit(1.25));
    let coarse = region_eigenvalue(region, hc, tol)?;
    let r2 = (hc / h).sq();
    Ok(EigenResult {
        value: fine.value,
        method: Method::Fem,
        discretization: h,
        error_estimate: (fine.value - coarse.value).abs() / (r2 - T::one()),
    })
}

pub fn dn_eigenvalue<T: Real>(w: &Domain<T>, v: &VSpec, h: T, tol: T) -> Result<EigenResult<T>> {
    region_dn_eigenvalue(&build_region(w, v, &[], &[])?, h, tol)
}

/// `α(V) + α(W∖V)` for the split of `W` by the circle of `h`.
pub fn partition_alpha_sum<T: Real>(w: &Domain<T>, h: &HalfSpace<T>, mesh_h: T, tol: T) -> Result<(T, T)> {
    let n = h.normal.vec().to_array().map(|x| x.to_f64_lossy());
    let off = h.offset.to_f64_lossy();
    let inside = VSpec::HalfSpace { normal: n, offset: off };
    let outside = VSpec::HalfSpace { normal: n.map(|x| -x), offset: -off };
    let mu1 = region_eigenvalue(&build_region(w, &inside, &[], &[])?, mesh_h, tol)?.value;
    let mu2 = region_eigenvalue(&build_region(w, &outside, &[], &[])?, mesh_h, tol)?.value;
    Ok((char_exponent(mu1)?.alpha, char_exponent(mu2)?.alpha))
}

/// Cap-shaped lower bound for `μ(V)`: `λ(U_{1,b})` with `b` chosen so that
/// `Ω_{a,b}` has the area of `V`, `a = area(W)/2π`.
pub fn lune_lower_bound<T: Real>(w_area: T, v_area: T, tol: T) -> Result<EigenResult<T>> {
    let a = crate::spindle::SpindleParam::new(w_area / T::TAU())?;
    crate::spectral::faber_krahn_bound(a, v_area.twice(), tol)
}
