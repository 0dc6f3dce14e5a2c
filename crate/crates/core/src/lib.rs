pub mod error;
pub mod numerics;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Real;
pub mod classifier;
pub mod csi_data;
pub mod diagnostics;
pub mod enumeration;
pub mod features;
pub mod harness;
pub mod preprocess;
pub mod separation;
pub mod spectral;

/// `f64` instantiations of the generic containers and results.
pub type Matrix64 = numerics::Matrix<f64>;
pub type Tensor64 = numerics::Tensor3<f64>;
pub type CsiTrial64 = csi_data::CsiTrial<f64>;
pub type NormalizedTrial64 = preprocess::NormalizedTrial<f64>;
pub type SeparationResult64 = separation::SeparationResult<f64>;
pub type FeatureVector64 = features::FeatureVector<f64>;
pub type Classifier64 = classifier::TrainedClassifier<f64>;
