//! Tumor segmentation toolkit.
//!
//! A grayscale slice plus a detector bounding box goes in; a binary region
//! mask comes out. The main path is a morphological Chan-Vese (active
//! contours without edges) evolution seeded by a square level set at the
//! box ([`acwe`]). A Prewitt/Sobel gradient pipeline ([`edge`]) provides the
//! comparison arm, and [`metrics`] scores masks against a reference with
//! Dice, Rand index, VOI, GCE, BDE, PSNR and MAE, along with the usual
//! classifier statistics.
//!
//! [`rpn`] holds the region-proposal box arithmetic (anchors, IoU labeling,
//! box deltas, the two-term proposal loss and ROI max pooling). [`phantom`]
//! generates seeded Rician-noise test images with exact ground truth.

pub mod acwe;
pub mod edge;
mod error;
pub mod image;
pub mod metrics;
pub(crate) mod morph;
pub mod phantom;
pub mod rpn;

pub use error::{Error, Result};
pub use image::{BinaryMask, BoundingBox, Frame, GrayImage, LabelMap};
