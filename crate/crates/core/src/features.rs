//! Eigen-feature extraction from the cropped square hand mask.
//!
//! Raster rows are the variables and raster columns the observations, so a
//! `side`×`side` crop produces a `side`×`side` covariance whose leading
//! eigenpairs form the gesture signature.

use thiserror::Error;

use crate::imaging::BinaryMask;
use crate::linalg::{covariance, eigen_symmetric, LinalgError, Matrix};
use crate::scalar::Scalar;

pub const DEFAULT_EIGEN_COUNT: usize = 5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("DegenerateCrop: constant crop has zero covariance")]
    DegenerateCrop,
    #[error("crop must be square, got {width}x{height}")]
    NotSquare { width: usize, height: usize },
    #[error("eigen count {count} must be between 1 and {side}")]
    BadEigenCount { count: usize, side: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Leading eigenvalues (non-increasing, non-negative) and their unit,
/// sign-canonical eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<T>>,
}

impl<T: Scalar> FeatureSet<T> {
    pub fn eigen_count(&self) -> usize {
        self.values.len()
    }

    pub fn vector_len(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }
}

/// Interprets mask bits as 0.0/1.0 with rows as variables.
pub fn mask_to_matrix<T: Scalar>(crop: &BinaryMask) -> Matrix<T> {
    Matrix::from_fn(crop.height(), crop.width(), |i, j| {
        if crop.get(j, i) {
            T::one()
        } else {
            T::zero()
        }
    })
}

/// Top `eigen_count` eigenpairs of the crop's row covariance.
pub fn extract_features<T: Scalar>(crop: &BinaryMask, eigen_count: usize) -> Result<FeatureSet<T>, FeatureError> {
    let (w, h) = (crop.width(), crop.height());
    if w != h {
        return Err(FeatureError::NotSquare { width: w, height: h });
    }
    if eigen_count == 0 || eigen_count > h {
        return Err(FeatureError::BadEigenCount { count: eigen_count, side: h });
    }
    let cov = covariance(&mask_to_matrix::<T>(crop))?;
    if cov.max_abs() <= T::zero_clamp() {
        return Err(FeatureError::DegenerateCrop);
    }
    let decomposition = eigen_symmetric(&cov, T::default_eigen_tol())?;

    let mut values = Vec::with_capacity(eigen_count);
    let mut vectors = Vec::with_capacity(eigen_count);
    for pair in decomposition.pairs.into_iter().take(eigen_count) {
        // PSD: anything this small (including tiny negatives) is zero
        let v = if pair.value.abs() < T::zero_clamp() { T::zero() } else { pair.value };
        values.push(v);
        vectors.push(pair.vector);
    }
    Ok(FeatureSet { values, vectors })
}
