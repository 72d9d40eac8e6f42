//! Color-fidelity evaluation: mask checks, k-means quantization, cluster
//! matching, per-object metrics, leakage scoring and aggregation.

mod aggregate;
pub mod io;
mod mask;
mod pipeline;
mod quantize;
mod score;

pub use aggregate::{aggregate, Criterion, GroupKey, SummaryRow};
pub use mask::{
    mask_iou, validate_image_masks, MaskBundle, MaskSource, MaskValidation, ObjectMask,
};
pub use pipeline::{evaluate_manifest, EvalOutput, EvalSources};
pub use quantize::{match_cluster, quantize_colors, ClusterSpace, ColorCluster};
pub use score::{invalid_score, score_object, ObjectMetrics, ObjectScore, ScoreConfig};

/// Accuracy threshold on ΔE_CMC.
pub const DEFAULT_TAU: f64 = 10.0;
/// Number of k-means clusters per object.
pub const DEFAULT_K: usize = 5;
/// Minimum share of object pixels for a cluster to be matched.
pub const DEFAULT_MIN_FRACTION: f64 = 0.20;
/// Pairwise mask IoU above which an image is rejected.
pub const MAX_MASK_IOU: f64 = 0.5;
