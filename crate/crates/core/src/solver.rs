//! Sparse Cholesky factorizations and preconditioned conjugate gradients.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{MatMut, Side};
use sprs::CsMat;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    pub relative_residual: f64,
    /// Diagonal-block factorizations reused from the cache.
    pub cache_hits: usize,
}

/// Sparse `LLᵀ` factorization of a symmetric positive definite matrix.
pub struct Cholesky {
    n: usize,
    llt: Option<Llt<usize, f64>>,
}

impl std::fmt::Debug for Cholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Cholesky {{ n: {} }}", self.n)
    }
}

impl Cholesky {
    /// Factorizes `a`; only its lower triangle is read.
    pub fn new(a: &CsMat<f64>) -> Result<Self> {
        let n = a.rows();
        if a.cols() != n {
            return Err(Error::Dimension { expected: n, got: a.cols() });
        }
        if n == 0 {
            return Ok(Cholesky { n, llt: None });
        }
        let mut trip = Vec::with_capacity(a.nnz());
        for (r, row) in a.outer_iterator().enumerate() {
            for (c, &v) in row.iter() {
                if c <= r {
                    trip.push(Triplet::new(r, c, v));
                }
            }
        }
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("{e:?}")))?;
        Ok(Cholesky { n, llt: Some(llt) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n, "right-hand side dimension");
        if let Some(llt) = &self.llt {
            llt.solve_in_place(MatMut::from_column_major_slice_mut(b, self.n, 1));
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Conjugate gradients for `A x = b` preconditioned by `M⁻¹`, from a zero
/// initial guess, until `‖b - A x‖ ≤ tol ‖b‖`.
pub fn pcg(
    apply: impl Fn(&[f64], &mut [f64]),
    precond: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok((x, SolveReport::default()));
    }
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut it = 0;
    let mut res = 1.0;
    while it < max_iter {
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::Factorization("operator is not positive definite".into()));
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        it += 1;
        res = norm(&r) / bnorm;
        if res <= tol {
            // accept only if the true residual agrees; otherwise restart from it
            apply(&x, &mut q);
            for i in 0..n {
                r[i] = b[i] - q[i];
            }
            res = norm(&r) / bnorm;
            if res <= tol {
                break;
            }
            precond(&r, &mut z);
            rz = dot(&r, &z);
            p.copy_from_slice(&z);
            continue;
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let report = SolveReport {
        iterations: it,
        relative_residual: res,
        cache_hits: 0,
    };
    if res > tol {
        return Err(Error::NonConvergence(report));
    }
    Ok((x, report))
}

/// Iteration cap for a system of dimension `dim`.
pub fn iteration_cap(dim: usize) -> usize {
    (10 * dim).max(1000)
}

/// `‖A x - b‖ / ‖b‖`, defined as 0 for a zero system.
pub fn relative_residual(apply: impl Fn(&[f64], &mut [f64]), x: &[f64], b: &[f64]) -> f64 {
    let mut q = vec![0.0; x.len()];
    apply(x, &mut q);
    let r = b.iter().zip(&q).map(|(bi, qi)| (bi - qi) * (bi - qi)).sum::<f64>().sqrt();
    let bn = norm(b);
    if bn == 0.0 {
        if r == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        r / bn
    }
}
