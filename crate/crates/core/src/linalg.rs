//! Dense linear algebra over [`Scalar`]: a cyclic Jacobi eigensolver for the
//! small symmetric matrices of CMA-ES, and a one-sided Jacobi SVD used for
//! least squares with a pseudoinverse fallback.

use ndarray::Array2;
use rand::Rng;

use crate::{rng, Error, Result, Scalar};

const MAX_SWEEPS: usize = 64;

/// Eigendecomposition `A = V diag(values) Vᵀ`; eigenvectors are the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen<T> {
    pub values: Vec<T>,
    pub vectors: Array2<T>,
}

pub fn symmetric_eigen<T: Scalar>(a: &Array2<T>) -> Result<SymmetricEigen<T>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: a.ncols(),
        });
    }
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalBreakdown(
            "non-finite entry in symmetric matrix".into(),
        ));
    }
    let mut m = a.clone();
    let mut v = Array2::<T>::eye(n);
    let total: T = m.iter().map(|&x| x * x).sum();
    let tiny = T::epsilon() * T::epsilon() * total;

    for _ in 0..MAX_SWEEPS {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + m[[p, q]] * m[[p, q]];
            }
        }
        if off <= tiny || off == T::zero() {
            let values = (0..n).map(|i| m[[i, i]]).collect();
            return Ok(SymmetricEigen { values, vectors: v });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (T::lit(2.0) * apq);
                let t = if theta.abs() > T::lit(1e150) {
                    T::one() / (T::lit(2.0) * theta)
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[[k, p]], m[[k, q]]);
                    m[[k, p]] = c * akp - s * akq;
                    m[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[[p, k]], m[[q, k]]);
                    m[[p, k]] = c * apk - s * aqk;
                    m[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (vkp, vkq) = (v[[k, p]], v[[k, q]]);
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    Err(Error::NumericalBreakdown(
        "Jacobi eigensolver did not converge".into(),
    ))
}

/// Minimum-norm least-squares solution of `A x ≈ b`.
///
/// Columns are equilibrated to unit norm, then decomposed with a one-sided
/// Jacobi SVD; singular values below `eps · max(n, p) · σ_max` are treated as
/// zero, so rank-deficient designs yield the pseudoinverse solution.
pub fn lstsq<T: Scalar>(a: &Array2<T>, b: &[T]) -> Result<Vec<T>> {
    let (n, p) = a.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    let mut cols: Vec<Vec<T>> = (0..p).map(|j| a.column(j).to_vec()).collect();
    let scales: Vec<T> = cols
        .iter_mut()
        .map(|c| {
            let norm = c.iter().map(|&x| x * x).sum::<T>().sqrt();
            if norm > T::zero() {
                c.iter_mut().for_each(|x| *x = *x / norm);
            }
            norm
        })
        .collect();
    let mut v: Vec<Vec<T>> = (0..p)
        .map(|j| (0..p).map(|i| if i == j { T::one() } else { T::zero() }).collect())
        .collect();

    let eps = T::epsilon();
    let conv = eps * T::from_usize_lossy(n.max(p));
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..p {
            for j in (i + 1)..p {
                let (alpha, beta, gamma) = {
                    let (ci, cj) = (&cols[i], &cols[j]);
                    let mut al = T::zero();
                    let mut be = T::zero();
                    let mut ga = T::zero();
                    for (&x, &y) in ci.iter().zip(cj) {
                        al = al + x * x;
                        be = be + y * y;
                        ga = ga + x * y;
                    }
                    (al, be, ga)
                };
                // Columns start at unit norm; one that has shrunk to rounding
                // level is numerically null and would only churn.
                if gamma == T::zero()
                    || gamma.abs() <= conv * (alpha * beta).sqrt()
                    || alpha.min(beta) <= conv * conv
                {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut cols, i, j, c, s);
                rotate_pair(&mut v, i, j, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalBreakdown("Jacobi SVD did not converge".into()));
    }

    let sigmas: Vec<T> = cols
        .iter()
        .map(|c| c.iter().map(|&x| x * x).sum::<T>().sqrt())
        .collect();
    let smax = sigmas.iter().copied().fold(T::zero(), T::max);
    let tol = smax * eps * T::from_usize_lossy(n.max(p));
    let mut x = vec![T::zero(); p];
    for (k, col) in cols.iter().enumerate() {
        let sk = sigmas[k];
        if sk <= tol || sk == T::zero() {
            continue;
        }
        // u_k = col / s_k, so (u_k · b) / s_k = (col · b) / s_k².
        let proj = col.iter().zip(b).map(|(&u, &bb)| u * bb).sum::<T>() / (sk * sk);
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = *xj + v[k][j] * proj;
        }
    }
    for (xj, &s) in x.iter_mut().zip(&scales) {
        *xj = if s > T::zero() { *xj / s } else { T::zero() };
    }
    Ok(x)
}

fn rotate_pair<T: Scalar>(cols: &mut [Vec<T>], i: usize, j: usize, c: T, s: T) {
    let (head, tail) = cols.split_at_mut(j);
    let (ci, cj) = (&mut head[i], &mut tail[0]);
    for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

pub fn mat_vec<T: Scalar>(m: &Array2<T>, v: &[T]) -> Vec<T> {
    m.rows()
        .into_iter()
        .map(|row| row.iter().zip(v).map(|(&a, &b)| a * b).sum())
        .collect()
}

/// `Mᵀ v`.
pub fn mat_t_vec<T: Scalar>(m: &Array2<T>, v: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); m.ncols()];
    for (row, &vi) in m.rows().into_iter().zip(v) {
        for (o, &a) in out.iter_mut().zip(row.iter()) {
            *o = *o + a * vi;
        }
    }
    out
}

pub fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum::<T>().sqrt()
}

/// Random orthogonal matrix: modified Gram-Schmidt on a standard Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Array2<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = (0..dim)
            .map(|_| (0..dim).map(|_| rng::standard_normal::<f64, _>(rng)).collect())
            .collect();
        let mut ok = true;
        for j in 0..dim {
            for k in 0..j {
                let dot: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
                let prev = cols[k].clone();
                cols[j].iter_mut().zip(&prev).for_each(|(a, b)| *a -= dot * b);
            }
            let nrm = norm(&cols[j]);
            if nrm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|a| *a /= nrm);
        }
        if ok {
            return Array2::from_shape_fn((dim, dim), |(i, j)| cols[j][i]);
        }
    }
}
