//! Segmentation and classification quality measures.

mod classification;
mod distance;
mod segmentation;

pub use classification::{cls_stats, cohen_kappa, roc_auc, ClassLabel, ClsStats, RocCurve, ScoredSample};
pub use segmentation::{
    bde, boundary, confusion, dice, evaluate_pair, gce, mae, psnr, rand_index, voi, ConfusionCounts,
    SegReport,
};
