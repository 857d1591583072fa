//! Gradient-operator baseline: Prewitt or Sobel magnitude, Otsu or fixed
//! threshold, disk closing, hole filling and largest-component selection.

use serde::{Deserialize, Serialize};

use crate::acwe::working_window;
use crate::error::{param, Result};
use crate::image::{preprocess::bin_of, BinaryMask, BoundingBox, GrayImage};
use crate::morph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeOperator {
    Prewitt,
    Sobel,
}

impl EdgeOperator {
    fn center_weight(self) -> f64 {
        match self {
            EdgeOperator::Prewitt => 1.0,
            EdgeOperator::Sobel => 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdRule {
    Otsu,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeParams {
    pub operator: EdgeOperator,
    pub threshold: ThresholdRule,
    pub closing_radius: usize,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            operator: EdgeOperator::Prewitt,
            threshold: ThresholdRule::Otsu,
            closing_radius: 2,
        }
    }
}

impl EdgeParams {
    pub fn validate(&self) -> Result<()> {
        if let ThresholdRule::Fixed(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return param(format!("fixed threshold {t} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

/// `sqrt(Gx² + Gy²)` with edge replication at the border, divided by its
/// maximum (all zeros when the maximum is zero).
pub fn gradient_magnitude(img: &GrayImage, op: EdgeOperator) -> Result<GrayImage> {
    let (w, h) = img.dims();
    if w < 3 || h < 3 {
        return param(format!("gradient needs at least 3x3 pixels, got {w}x{h}"));
    }
    let c = op.center_weight();
    let raw = GrayImage::from_fn(w, h, |x, y| {
        let p = |dx: isize, dy: isize| img.get_clamped(x as isize + dx, y as isize + dy);
        let gx = (p(1, -1) + c * p(1, 0) + p(1, 1)) - (p(-1, -1) + c * p(-1, 0) + p(-1, 1));
        let gy = (p(-1, 1) + c * p(0, 1) + p(1, 1)) - (p(-1, -1) + c * p(0, -1) + p(1, -1));
        (gx * gx + gy * gy).sqrt()
    });
    let (_, max) = raw.min_max();
    if max <= 0.0 {
        return Ok(raw.map(|_| 0.0));
    }
    Ok(raw.map(|v| v / max))
}

/// Between-class variance of a split, as an exact fraction `num / den` up to a
/// common positive factor. `n0`, `n1` are class counts and `s0`, `s1` the sums
/// of bin indices.
fn split_score(n0: u64, s0: u64, n1: u64, s1: u64) -> (u128, u128) {
    if n0 == 0 || n1 == 0 {
        return (0, 1);
    }
    let d = (n1 as i128 * s0 as i128 - n0 as i128 * s1 as i128).unsigned_abs();
    (d * d, n0 as u128 * n1 as u128)
}

/// `a > b` for fractions `(num, den)`; falls back to floating point if the
/// cross products would overflow.
pub(crate) fn frac_gt(a: (u128, u128), b: (u128, u128)) -> bool {
    match (a.0.checked_mul(b.1), b.0.checked_mul(a.1)) {
        (Some(l), Some(r)) => l > r,
        _ => a.0 as f64 / a.1 as f64 > b.0 as f64 / b.1 as f64,
    }
}

/// Otsu threshold over a 256-bin histogram.
///
/// Returns the midpoint between the last bin of the lower class and the next
/// bin, so `v > t` separates the classes. Ties go to the lowest split; an
/// image with no separating split returns 0.
pub fn otsu_threshold(img: &GrayImage) -> f64 {
    let mut hist = [0u64; 256];
    for &v in img.data() {
        hist[bin_of(v)] += 1;
    }
    let n: u64 = hist.iter().sum();
    let total: u64 = hist.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();

    let mut best: Option<(usize, (u128, u128))> = None;
    let (mut n0, mut s0) = (0u64, 0u64);
    for (k, &c) in hist.iter().enumerate().take(255) {
        n0 += c;
        s0 += k as u64 * c;
        let score = split_score(n0, s0, n - n0, total - s0);
        if score.0 == 0 {
            continue;
        }
        if best.is_none_or(|(_, b)| frac_gt(score, b)) {
            best = Some((k, score));
        }
    }
    match best {
        Some((k, _)) => (k as f64 + 0.5) / 255.0,
        None => 0.0,
    }
}

/// Baseline region mask for the object in `b`, full-frame.
pub fn segment_baseline(img: &GrayImage, b: &BoundingBox, params: &EdgeParams) -> Result<BinaryMask> {
    params.validate()?;
    let (width, height) = img.dims();
    let window = working_window(b, width, height)?;
    let sub = img.crop(window)?;
    let grad = gradient_magnitude(&sub, params.operator)?;
    let t = match params.threshold {
        ThresholdRule::Otsu => otsu_threshold(&grad),
        ThresholdRule::Fixed(t) => t,
    };
    let edges = grad.threshold(t);
    let closed = morph::close_disk(&edges, params.closing_radius);
    let filled = morph::fill_holes(&closed);
    let centroid = ((window.w as f64 - 1.0) / 2.0, (window.h as f64 - 1.0) / 2.0);
    let region = morph::largest_component(&filled, centroid);
    BinaryMask::embed(&region, width, height, window)
}
