//! Graph metadata analysis toolkit.
//!
//! The crate bundles five cooperating subsystems:
//!
//! - [`graph`]: immutable CSR graphs with integer edge multiplicities plus
//!   feature/label containers and file loaders.
//! - [`properties`]: the 15 dataset statistics (density, clustering,
//!   Gini-Degree, homophily, feature similarities, ...) used as regression
//!   covariates.
//! - [`msglasso`]: a multivariate sparse group lasso solver (entrywise L1 +
//!   row-group L2,1 penalties) with a regularization path and salience report.
//! - [`generator`]: degree-corrected (contextual) SBM samplers with power-law
//!   degree corrections and a Gini-Degree calibration loop.
//! - [`separability`]: single-layer graph convolution, degree-thresholded
//!   subgroups, mid-point hyperplane checks, and concentration diagnostics.
//! - [`experiment`]: controlled parameter sweeps that train a linear proxy
//!   classifier on convolved features and report accuracy trends.

pub mod chart;
pub mod experiment;
pub mod generator;
pub mod graph;
pub mod msglasso;
pub mod properties;
pub mod rng;
pub mod separability;

pub use graph::{FeatureMatrix, Graph, LabelVector};
