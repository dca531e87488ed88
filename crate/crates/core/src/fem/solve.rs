//! Generalized eigenproblem `K x = λ M x` by inverse iteration over a
//! reverse Cuthill-McKee ordered envelope Cholesky factor.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::assemble::{AssembledSystem, CsrMatrix};

pub const MAX_ITERATIONS: usize = 2000;

/// Reverse Cuthill-McKee permutation; `perm[new] = old`.
pub fn rcm_order<T: Real>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row_ptr[i + 1] - a.row_ptr[i]).collect();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // New component: start from its lowest-degree vertex.
        let start = (0..n).filter(|&i| !seen[i]).min_by_key(|&i| (degree[i], i)).expect("unvisited");
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nb: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| !seen[j]).collect();
            nb.sort_by_key(|&j| (degree[j], j));
            for j in nb {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Lower-triangular envelope factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct SkylineCholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> SkylineCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let n = a.n;
        let perm = rcm_order(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = inv[old];
            for (j, _) in a.row(old) {
                first[i] = first[i].min(inv[j]);
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![T::zero(); start[n]];
        for old in 0..n {
            let i = inv[old];
            for (jo, v) in a.row(old) {
                let j = inv[jo];
                if j <= i {
                    data[start[i] + j - first[i]] = v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                for k in lo..j {
                    s -= data[start[i] + k - fi] * data[start[j] + k - fj];
                }
                if j < i {
                    data[start[i] + j - fi] = s / data[start[j] + j - fj];
                } else {
                    if !(s > T::zero()) {
                        return Err(Error::NoConvergence(format!("matrix not positive definite at pivot {i}")));
                    }
                    data[start[i] + i - fi] = s.sqrt();
                }
            }
        }
        Ok(Self { perm, first, start, data })
    }

    fn at(&self, i: usize, j: usize) -> T {
        self.data[self.start[i] + j - self.first[i]]
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut y: Vec<T> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let mut s = y[i];
            for k in self.first[i]..i {
                s -= self.at(i, k) * y[k];
            }
            y[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            y[i] /= self.at(i, i);
            let yi = y[i];
            for k in self.first[i]..i {
                y[k] -= self.at(i, k) * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }
}

#[derive(Debug, Clone)]
pub struct EigenSolution<T> {
    pub value: T,
    /// Eigenvector on all vertices, zero on Dirichlet vertices, unit `M`-norm.
    pub vector: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (x, y)| s + *x * *y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Inverse iteration on `(K + shift·M) x = (λ + shift) M x`, optionally
/// keeping `x` `M`-orthogonal to `deflate`.
fn inverse_iteration<T: Real>(
    k: &CsrMatrix<T>,
    m: &CsrMatrix<T>,
    shift: T,
    deflate: Option<&[T]>,
    tol: T,
) -> Result<(T, Vec<T>, usize, T)> {
    let n = k.n;
    let shifted = if shift == T::zero() {
        k.clone()
    } else {
        let mut trip = Vec::with_capacity(k.nnz() + m.nnz());
        for i in 0..n {
            trip.extend(k.row(i).map(|(j, v)| (i, j, v)));
            trip.extend(m.row(i).map(|(j, v)| (i, j, v * shift)));
        }
        CsrMatrix::from_triplets(n, trip)
    };
    let chol = SkylineCholesky::factor(&shifted)?;
    let project = |x: &mut Vec<T>| {
        if let Some(d) = deflate {
            let md = m.mul_vec(d);
            let c = dot(x, &md) / dot(d, &md);
            for (xi, di) in x.iter_mut().zip(d) {
                *xi -= c * *di;
            }
        }
    };
    let mut x = vec![T::one(); n];
    if deflate.is_some() {
        // All-ones is the deflated direction on a closed surface; tilt it deterministically.
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = T::from(i % 7).expect("small") - T::from(3).expect("small");
        }
    }
    project(&mut x);
    let mut residual = T::infinity();
    for it in 1..=MAX_ITERATIONS {
        let mut y = chol.solve(&m.mul_vec(&x));
        project(&mut y);
        let my = m.mul_vec(&y);
        let scale = dot(&y, &my).sqrt();
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::SolverStagnation { iterations: it, residual: f64::NAN });
        }
        for v in &mut y {
            *v /= scale;
        }
        let ky = k.mul_vec(&y);
        let my: Vec<T> = my.into_iter().map(|v| v / scale).collect();
        let lambda = dot(&y, &ky);
        let r: Vec<T> = ky.iter().zip(&my).map(|(a, b)| *a - lambda * *b).collect();
        residual = norm(&r) / (lambda.abs() * norm(&my));
        x = y;
        if residual <= tol {
            return Ok((lambda, x, it, residual));
        }
    }
    Err(Error::SolverStagnation { iterations: MAX_ITERATIONS, residual: residual.to_f64_lossy() })
}

/// Smallest eigenvalue with homogeneous Dirichlet data on the non-free vertices.
pub fn smallest_eigenvalue<T: Real>(sys: &AssembledSystem<T>, tol: T) -> Result<EigenSolution<T>> {
    if sys.free.len() == sys.n_vertices() {
        return Err(Error::NoDirichlet);
    }
    if sys.free.is_empty() {
        return Err(Error::MeshQualityFailure("no free vertices".into()));
    }
    let k = sys.stiffness.restrict(&sys.free);
    let m = sys.mass.restrict(&sys.free);
    let (value, xf, iterations, residual) = inverse_iteration(&k, &m, T::zero(), None, tol)?;
    let mut vector = vec![T::zero(); sys.n_vertices()];
    for (&i, v) in sys.free.iter().zip(xf) {
        vector[i] = v;
    }
    Ok(EigenSolution { value, vector, iterations, residual })
}

/// First non-zero eigenvalue of the pure Neumann (or closed) problem on all
/// vertices, deflating constants.
pub fn first_nonzero_eigenvalue<T: Real>(sys: &AssembledSystem<T>, tol: T) -> Result<EigenSolution<T>> {
    let ones = vec![T::one(); sys.n_vertices()];
    let (value, vector, iterations, residual) =
        inverse_iteration(&sys.stiffness, &sys.mass, T::one(), Some(&ones), tol)?;
    Ok(EigenSolution { value, vector, iterations, residual })
}

/// `xᵀKx / xᵀMx`.
pub fn rayleigh_quotient<T: Real>(sys: &AssembledSystem<T>, x: &[T]) -> T {
    dot(x, &sys.stiffness.mul_vec(x)) / dot(x, &sys.mass.mul_vec(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> CsrMatrix<f64> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, t)
    }

    #[test]
    fn cholesky_solves_tridiagonal() {
        let a = laplacian_1d(50);
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.3).sin()).collect();
        let b = a.mul_vec(&x);
        let y = SkylineCholesky::factor(&a).unwrap().solve(&b);
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-11));
    }

    #[test]
    fn inverse_iteration_finds_smallest_1d_mode() {
        let n = 40;
        let k = laplacian_1d(n);
        let m = CsrMatrix::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect());
        let (l, _, _, _) = inverse_iteration(&k, &m, 0.0, None, 1e-10).unwrap();
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        assert!((l - exact).abs() < 1e-12 * exact.max(1.0) + 1e-14, "{l} vs {exact}");
    }
}
