//! P1 stiffness and mass matrices on flat triangles.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

use super::mesh::SurfaceMesh;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    /// Sums duplicates in the order given, so the result does not depend on
    /// how the triplets were produced as long as their order is fixed.
    pub fn from_triplets(n: usize, mut trip: Vec<(usize, usize, T)>) -> Self {
        trip.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::new();
        let mut val: Vec<T> = Vec::new();
        let mut last = None;
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *val.last_mut().expect("entry") += v;
            } else {
                col.push(c);
                val.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self { n, row_ptr, col, val }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.col[k], self.val[k]))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        match r.binary_search(&j) {
            Ok(k) => self.val[self.row_ptr[i] + k],
            Err(_) => T::zero(),
        }
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n).map(|i| self.row(i).fold(T::zero(), |s, (j, v)| s + v * x[j])).collect()
    }

    pub fn nnz(&self) -> usize {
        self.val.len()
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn total(&self) -> T {
        self.val.iter().copied().sum()
    }

    /// Principal submatrix on `keep` (indices into the original, in order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (k, &i) in keep.iter().enumerate() {
            map[i] = k;
        }
        let mut row_ptr = vec![0usize; keep.len() + 1];
        let mut col = Vec::new();
        let mut val = Vec::new();
        for (k, &i) in keep.iter().enumerate() {
            for (j, v) in self.row(i) {
                if map[j] != usize::MAX {
                    col.push(map[j]);
                    val.push(v);
                }
            }
            row_ptr[k + 1] = col.len();
        }
        Self { n: keep.len(), row_ptr, col, val }
    }
}

/// Element matrices of the flat triangle `p`: stiffness `e_i·e_j / 4A`
/// with `e_i` the edge opposite corner `i`, consistent mass `A(1 + δ_ij)/12`.
pub fn element_matrices<T: Real>(p: [[T; 3]; 3]) -> Option<([[T; 3]; 3], [[T; 3]; 3], T)> {
    let sub = |a: [T; 3], b: [T; 3]| [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let dot = |a: [T; 3], b: [T; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let e = [sub(p[2], p[1]), sub(p[0], p[2]), sub(p[1], p[0])];
    let c = [
        e[1][1] * e[2][2] - e[1][2] * e[2][1],
        e[1][2] * e[2][0] - e[1][0] * e[2][2],
        e[1][0] * e[2][1] - e[1][1] * e[2][0],
    ];
    let area = dot(c, c).sqrt() * T::half();
    let longest = e.iter().map(|v| dot(*v, *v)).fold(T::zero(), T::max);
    if !(area > lit::<T>(1e-12) * longest) {
        return None;
    }
    let mut k = [[T::zero(); 3]; 3];
    let mut m = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = dot(e[i], e[j]) / (lit::<T>(4.0) * area);
            m[i][j] = area / lit(12.0) * if i == j { T::two() } else { T::one() };
        }
    }
    Some((k, m, area))
}

/// Stiffness and mass on all vertices, plus the free-vertex index map.
#[derive(Debug, Clone)]
pub struct AssembledSystem<T> {
    pub stiffness: CsrMatrix<T>,
    pub mass: CsrMatrix<T>,
    /// Non-Dirichlet vertices in increasing order.
    pub free: Vec<usize>,
}

impl<T: Real> AssembledSystem<T> {
    pub fn n_vertices(&self) -> usize {
        self.stiffness.n
    }
}

pub fn assemble<T: Real>(mesh: &SurfaceMesh<T>) -> Result<AssembledSystem<T>> {
    let locals: Vec<Option<([[T; 3]; 3], [[T; 3]; 3], T)>> =
        mesh.triangles.par_iter().map(|t| element_matrices(t.map(|v| mesh.vertices[v].vec().to_array()))).collect();
    let mut ks = Vec::with_capacity(9 * locals.len());
    let mut ms = Vec::with_capacity(9 * locals.len());
    for (ti, (t, loc)) in mesh.triangles.iter().zip(&locals).enumerate() {
        let (k, m, _) = loc.ok_or(Error::DegenerateTriangle(ti))?;
        for i in 0..3 {
            for j in 0..3 {
                ks.push((t[i], t[j], k[i][j]));
                ms.push((t[i], t[j], m[i][j]));
            }
        }
    }
    let n = mesh.vertices.len();
    let free = (0..n).filter(|&i| !mesh.dirichlet[i]).collect();
    Ok(AssembledSystem { stiffness: CsrMatrix::from_triplets(n, ks), mass: CsrMatrix::from_triplets(n, ms), free })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_triangle_has_cotangent_weights() {
        let (k, m, area) = element_matrices([[0.0f64, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        // right angle at corner 0: cot = 0 there, cot(π/4) = 1 at the others
        let expect = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - expect[i][j]).abs() < 1e-15);
            }
        }
        assert!((m.iter().flatten().sum::<f64>() - area).abs() < 1e-15);
        assert!((area - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_triangle_rejected() {
        assert!(element_matrices([[0.0f64, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).is_none());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let a = CsrMatrix::from_triplets(2, vec![(1, 0, 1.0f64), (0, 0, 2.0), (1, 0, 0.5), (0, 1, 1.5)]);
        assert_eq!(a.get(1, 0), 1.5);
        assert_eq!(a.get(0, 0), 2.0);
        assert_eq!(a.asymmetry(), 0.0);
        assert_eq!(a.mul_vec(&[1.0, 2.0]), vec![5.0, 1.5]);
    }
}
