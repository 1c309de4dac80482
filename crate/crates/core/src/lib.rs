//! Static hand-gesture alphabet recognition.
//!
//! The pipeline runs skin filtering in HSV space, keeps the largest
//! connected skin region, crops it to a square raster, takes the leading
//! eigenpairs of that raster's row covariance and matches them against a
//! database of labelled templates in two stages: per-eigenvector Euclidean
//! distance, then eigenvalue-gap-weighted distance summed over eigenpairs.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below fix the double-precision variant used by the CLI.

pub mod classifier;
pub mod config;
pub mod cropper;
pub mod evaluator;
pub mod features;
pub mod imaging;
pub mod linalg;
pub mod model_store;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod segmenter;

pub use classifier::{classify, ClassificationResult, DistanceRow, Level1Rule, Template};
pub use config::{Overrides, PipelineConfig};
pub use features::{extract_features, FeatureSet};
pub use imaging::{read_pnm, write_pnm, BinaryMask, GrayImage, Hsv, Raster, RgbImage};
pub use linalg::{eigen_symmetric, EigenDecomposition, EigenPair, Matrix};
pub use model_store::{load_db, save_db, TemplateDb};
pub use scalar::Scalar;
pub use segmenter::SkinRange;

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type FeatureSet64 = FeatureSet<f64>;
pub type FeatureSet32 = FeatureSet<f32>;
pub type Template64 = Template<f64>;
pub type TemplateDb64 = TemplateDb<f64>;
pub type TemplateDb32 = TemplateDb<f32>;
pub type ClassificationResult64 = ClassificationResult<f64>;
