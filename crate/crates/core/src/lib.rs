//! Automatic image annotation from MPEG-7 visual descriptors.
//!
//! Images are described by the Edge Histogram (EHD), Scalable Color (SCD)
//! and Color Layout (CLD) descriptors; CLD is reduced to 64 values with PCA
//! fitted on the training split. Gaussian naive Bayes and C4.5 decision trees
//! are trained on the vectors and compared on accuracy and annotation time.

pub mod bundle;
pub mod classifiers;
pub mod corpus;
pub mod descriptors;
pub mod error;
pub mod eval;
pub mod raster;
pub mod reduction;

pub use error::{Error, Result};
