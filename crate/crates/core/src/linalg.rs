//! Dense real matrices, per-row mean and covariance, and a cyclic Jacobi
//! eigensolver for symmetric input.

use thiserror::Error;

use crate::scalar::Scalar;

/// Maximum number of full Jacobi sweeps before giving up.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: entry ({row},{col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("tolerance must be positive")]
    BadTolerance,
    #[error("matrix has no columns")]
    Empty,
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// # Panics
    ///
    /// If `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    /// # Panics
    ///
    /// If the rows have differing lengths.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.as_ref().len(), cols, "ragged rows");
            data.extend_from_slice(r.as_ref());
        }
        Self { rows: rows.len(), cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<T>())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }
}

/// `(λ, x)` with `A·x = λ·x`, `x` unit-norm and sign-canonical.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair<T> {
    pub value: T,
    pub vector: Vec<T>,
}

/// All eigenpairs of a symmetric matrix, eigenvalues non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition<T> {
    pub pairs: Vec<EigenPair<T>>,
    pub sweeps: usize,
}

impl<T: Scalar> EigenDecomposition<T> {
    pub fn values(&self) -> Vec<T> {
        self.pairs.iter().map(|p| p.value).collect()
    }
}

/// Flips `v` so that its component of largest magnitude is positive; the
/// lowest index wins among equal magnitudes.
pub fn canonicalize_sign<T: Scalar>(v: &mut [T]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|x| x.is_sign_negative()) {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}

/// Mean of each row across all columns. Rows are variables, columns are
/// observations.
pub fn mean_vector<T: Scalar>(data: &Matrix<T>) -> Result<Vec<T>, LinalgError> {
    if data.cols == 0 {
        return Err(LinalgError::Empty);
    }
    let n = T::from_count(data.cols);
    Ok((0..data.rows).map(|i| data.row(i).iter().copied().sum::<T>() / n).collect())
}

/// Population covariance between rows, `C = (1/N)·Σ (x−m)(x−m)ᵀ` over the
/// `N` columns. Only the upper triangle is computed; the result is mirrored
/// so it is exactly symmetric.
pub fn covariance<T: Scalar>(data: &Matrix<T>) -> Result<Matrix<T>, LinalgError> {
    let mean = mean_vector(data)?;
    let (n, obs) = (data.rows, data.cols);
    let mut centered = Vec::with_capacity(n * obs);
    for (i, &m) in mean.iter().enumerate() {
        centered.extend(data.row(i).iter().map(|&v| v - m));
    }
    let inv = T::one() / T::from_count(obs);
    let mut c = Matrix::zeros(n, n);
    for i in 0..n {
        let ri = &centered[i * obs..(i + 1) * obs];
        for j in i..n {
            let rj = &centered[j * obs..(j + 1) * obs];
            let s: T = ri.iter().zip(rj).map(|(&a, &b)| a * b).sum();
            c.set(i, j, s * inv);
            c.set(j, i, s * inv);
        }
    }
    Ok(c)
}

fn off_diagonal_norm<T: Scalar>(a: &Matrix<T>) -> T {
    let mut s = T::zero();
    for i in 0..a.rows {
        for j in 0..a.cols {
            if i != j {
                s = s + a.get(i, j) * a.get(i, j);
            }
        }
    }
    s.sqrt()
}

/// Full eigendecomposition of a real symmetric matrix by cyclic Jacobi
/// rotations.
///
/// Sweeps continue until the off-diagonal Frobenius norm drops to
/// `tol·‖a‖_F`, at most [`MAX_SWEEPS`] times. Pairs come back sorted by
/// non-increasing eigenvalue (stable on ties), each vector sign-canonical.
pub fn eigen_symmetric<T: Scalar>(a: &Matrix<T>, tol: T) -> Result<EigenDecomposition<T>, LinalgError> {
    if tol.is_nan() || tol <= T::zero() {
        return Err(LinalgError::BadTolerance);
    }
    if a.rows != a.cols {
        return Err(LinalgError::NotSquare { rows: a.rows, cols: a.cols });
    }
    let n = a.rows;
    for i in 0..n {
        for j in 0..n {
            if !a.get(i, j).is_finite() {
                return Err(LinalgError::NonFinite { row: i, col: j });
            }
        }
    }
    let sym_tol = T::lit(1e-10) * a.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            if (a.get(i, j) - a.get(j, i)).abs() > sym_tol {
                return Err(LinalgError::NotSymmetric { row: i, col: j });
            }
        }
    }

    let mut m = a.clone();
    let mut v = Matrix::<T>::identity(n);
    let threshold = tol * a.frobenius_norm();
    let two = T::lit(2.0);

    let mut sweeps = 0;
    while off_diagonal_norm(&m) > threshold {
        if sweeps == MAX_SWEEPS {
            return Err(LinalgError::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m.get(p, q);
                if apq == T::zero() {
                    continue;
                }
                let app = m.get(p, p);
                let aqq = m.get(q, q);
                let theta = (aqq - app) / (two * apq);
                // smaller root of t² + 2θt − 1 = 0
                let t = if theta.abs() > T::max_value().sqrt() {
                    T::one() / (two * theta)
                } else {
                    let r = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
                    if theta < T::zero() {
                        -r
                    } else {
                        r
                    }
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = m.get(k, p);
                    let akq = m.get(k, q);
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    m.set(k, p, new_kp);
                    m.set(p, k, new_kp);
                    m.set(k, q, new_kq);
                    m.set(q, k, new_kq);
                }
                m.set(p, p, app - t * apq);
                m.set(q, q, aqq + t * apq);
                m.set(p, q, T::zero());
                m.set(q, p, T::zero());

                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut pairs: Vec<EigenPair<T>> = (0..n)
        .map(|j| {
            let mut vector: Vec<T> = (0..n).map(|i| v.get(i, j)).collect();
            canonicalize_sign(&mut vector);
            EigenPair { value: m.get(j, j), vector }
        })
        .collect();
    pairs.sort_by(|x, y| y.value.partial_cmp(&x.value).expect("finite eigenvalues"));
    Ok(EigenDecomposition { pairs, sweeps })
}
