use serde::{Deserialize, Serialize};

use super::{BinaryMask, GrayImage};
use crate::error::{param, Result};

pub const DEFAULT_STRETCH_LO: f64 = 2.0;
pub const DEFAULT_STRETCH_HI: f64 = 98.0;

const BINS: usize = 256;

/// Linear stretch of `[min, max]` onto `[0, 1]`. A constant image maps to all zeros.
pub fn normalize(img: &GrayImage) -> GrayImage {
    let (lo, hi) = img.min_max();
    stretch(img, lo, hi)
}

fn stretch(img: &GrayImage, lo: f64, hi: f64) -> GrayImage {
    let span = hi - lo;
    if span <= 0.0 {
        return img.map(|_| 0.0);
    }
    img.map(|v| ((v - lo) / span).clamp(0.0, 1.0))
}

#[inline]
pub(crate) fn bin_of(v: f64) -> usize {
    (v.clamp(0.0, 1.0) * 255.0).round() as usize
}

/// Maps every pixel to the cumulative fraction of pixels in its 256-bin
/// histogram bin or below.
pub fn histogram_equalize(img: &GrayImage) -> GrayImage {
    let mut hist = [0usize; BINS];
    for &v in img.data() {
        hist[bin_of(v)] += 1;
    }
    let n = img.data().len() as f64;
    let mut cdf = [0.0; BINS];
    let mut acc = 0usize;
    for (c, &h) in cdf.iter_mut().zip(hist.iter()) {
        acc += h;
        *c = acc as f64 / n;
    }
    img.map(|v| cdf[bin_of(v)])
}

/// Linearly interpolated percentile of `sorted` (`p` in percent).
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let rank = p / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Clips at the `lo_pct`/`hi_pct` percentiles, then stretches to `[0, 1]`.
pub fn contrast_stretch(img: &GrayImage, lo_pct: f64, hi_pct: f64) -> Result<GrayImage> {
    if !(0.0..=100.0).contains(&lo_pct) || !(0.0..=100.0).contains(&hi_pct) || lo_pct >= hi_pct {
        return param(format!(
            "percentiles must satisfy 0 <= lo < hi <= 100, got lo={lo_pct} hi={hi_pct}"
        ));
    }
    let mut sorted = img.data().to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile(&sorted, lo_pct);
    let hi = percentile(&sorted, hi_pct);
    Ok(stretch(img, lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResizeMode {
    Bilinear,
    Nearest,
}

/// Source coordinate for output index `i` under corner-aligned sampling.
#[inline]
fn source_coord(i: usize, src: usize, dst: usize) -> f64 {
    if dst == 1 {
        (src - 1) as f64 / 2.0
    } else {
        i as f64 * (src - 1) as f64 / (dst - 1) as f64
    }
}

/// Resamples with corner-aligned sampling (output corners hit input corners).
pub fn resize(img: &GrayImage, new_w: usize, new_h: usize, mode: ResizeMode) -> Result<GrayImage> {
    if new_w == 0 || new_h == 0 {
        return param(format!("target size {new_w}x{new_h} must be positive"));
    }
    let (w, h) = img.dims();
    if (w, h) == (new_w, new_h) {
        return Ok(img.clone());
    }
    Ok(match mode {
        ResizeMode::Nearest => GrayImage::from_fn(new_w, new_h, |x, y| {
            let (sx, sy) = nearest_source(x, y, (w, h), (new_w, new_h));
            img.get(sx, sy)
        }),
        ResizeMode::Bilinear => GrayImage::from_fn(new_w, new_h, |x, y| {
            let fx = source_coord(x, w, new_w);
            let fy = source_coord(y, h, new_h);
            let x0 = fx.floor() as usize;
            let y0 = fy.floor() as usize;
            let x1 = (x0 + 1).min(w - 1);
            let y1 = (y0 + 1).min(h - 1);
            let ax = fx - x0 as f64;
            let ay = fy - y0 as f64;
            let top = img.get(x0, y0) * (1.0 - ax) + img.get(x1, y0) * ax;
            let bottom = img.get(x0, y1) * (1.0 - ax) + img.get(x1, y1) * ax;
            top * (1.0 - ay) + bottom * ay
        }),
    })
}

fn nearest_source(x: usize, y: usize, src: (usize, usize), dst: (usize, usize)) -> (usize, usize) {
    let sx = source_coord(x, src.0, dst.0).round() as usize;
    let sy = source_coord(y, src.1, dst.1).round() as usize;
    (sx.min(src.0 - 1), sy.min(src.1 - 1))
}

/// Nearest-neighbour resize for masks; the result stays binary.
pub fn resize_mask(mask: &BinaryMask, new_w: usize, new_h: usize) -> Result<BinaryMask> {
    if new_w == 0 || new_h == 0 {
        return param(format!("target size {new_w}x{new_h} must be positive"));
    }
    let (w, h) = mask.dims();
    Ok(BinaryMask::from_fn(new_w, new_h, |x, y| {
        let (sx, sy) = nearest_source(x, y, (w, h), (new_w, new_h));
        mask.get(sx, sy)
    }))
}
