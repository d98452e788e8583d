//! Building blocks for sketch-prompted segmentation.
//!
//! * [`raster`] and [`skeleton`]: binary masks, thinning, components, block tiling.
//! * [`bezier`] and [`augment`]: cubic stroke fitting and control-point perturbation.
//! * [`transport`]: cosine scores, log-domain Sinkhorn and multi-prompt aggregation.
//! * [`attention`]: masked cross-attention and gated feature fusion.
//! * [`loss`]: focal loss.
//! * [`metrics`]: IoU statistics, saliency measures and LOWESS smoothing.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the common choices.

pub mod attention;
pub mod augment;
pub mod bezier;
pub mod error;
pub mod loss;
pub mod metrics;
pub mod raster;
pub mod rng;
pub mod scalar;
pub mod skeleton;
pub mod transport;

pub use error::{Error, Result};
pub use raster::{BinaryMask, GrayRaster};
pub use scalar::Scalar;

pub type Point = bezier::Point2<f64>;
pub type Point32 = bezier::Point2<f32>;
pub type Bezier = bezier::CubicBezier<f64>;
pub type Bezier32 = bezier::CubicBezier<f32>;
pub type Features = transport::FeatureMatrix<f64>;
pub type Features32 = transport::FeatureMatrix<f32>;
pub type Cost = transport::CostMatrix<f64>;
pub type Cost32 = transport::CostMatrix<f32>;
pub type Weights = transport::Marginals<f64>;
pub type Weights32 = transport::Marginals<f32>;
pub type Plan = transport::TransportPlan<f64>;
pub type Plan32 = transport::TransportPlan<f32>;
pub type Scores = transport::ScoreStack<f64>;
pub type Scores32 = transport::ScoreStack<f32>;
pub type Fusion = attention::FusionParams<f64>;
pub type Fusion32 = attention::FusionParams<f32>;
