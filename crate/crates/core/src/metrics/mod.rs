//! Segmentation metrics: overlap scores, saliency-style measures and the
//! size-versus-IoU smoothing analysis.

mod iou;
mod lowess;
mod saliency;

pub use iou::{
    aggregate, eval_sample, precision_at, read_records_csv, write_records_csv, EvalRecord, MetricsReport,
    PrecisionTable, SizeRange, SizeRangeFilter, PRECISION_THRESHOLDS,
};
pub use lowess::{bin_points, lowess_fit, lowess_smooth, LowessConfig};
pub use saliency::{
    enhanced_measure, gaussian_kernel, mae, nearest_foreground, saliency_suite, structure_measure,
    weighted_f_measure, SaliencyScores, STRUCTURE_ALPHA,
};
