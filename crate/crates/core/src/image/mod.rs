//! Grayscale images, label maps, bounding boxes and the preprocessing chain.

mod bbox;
mod io;
pub(crate) mod preprocess;

pub use bbox::{map_bbox, BoundingBox, Frame, Rect};
pub use io::{load_image, load_mask, save_image, save_mask};
pub use preprocess::{
    contrast_stretch, histogram_equalize, normalize, resize, resize_mask, ResizeMode, DEFAULT_STRETCH_HI,
    DEFAULT_STRETCH_LO,
};

use crate::error::{param, Result};

/// Row-major grid of intensities.
///
/// Loaders and the preprocessing operations produce values in `[0, 1]`;
/// the constructor only insists on finite values so intermediate feature
/// maps can share the type.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        if let Some(v) = data.iter().find(|v| !v.is_finite()) {
            return param(format!("non-finite intensity {v}"));
        }
        Ok(Self { width, height, data })
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// Pixel lookup with coordinates clamped into the frame (edge replication).
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> f64 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.get(x, y)
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.data
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            })
    }

    pub fn crop(&self, r: Rect) -> Result<Self> {
        r.check_inside(self.width, self.height)?;
        Ok(Self::from_fn(r.w, r.h, |x, y| self.get(r.x + x, r.y + y)))
    }

    /// Binarizes with `value > threshold`.
    pub fn threshold(&self, threshold: f64) -> BinaryMask {
        BinaryMask {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| v > threshold).collect(),
        }
    }
}

/// Row-major grid of non-negative integer labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn new(width: usize, height: usize, labels: Vec<u32>) -> Result<Self> {
        check_dims(width, height, labels.len())?;
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }
}

impl From<&BinaryMask> for LabelMap {
    fn from(m: &BinaryMask) -> Self {
        Self {
            width: m.width,
            height: m.height,
            labels: m.data.iter().map(|&b| b as u32).collect(),
        }
    }
}

/// Two-label map; `true` is foreground.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        check_dims(width, height, data.len())?;
        Ok(Self { width, height, data })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, false)
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        assert!(width > 0 && height > 0, "mask dimensions must be positive");
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self { width, height, data }
    }

    /// Label-map view; fails if any label is outside `{0, 1}`.
    pub fn from_labels(map: &LabelMap) -> Result<Self> {
        if let Some(l) = map.labels.iter().find(|&&l| l > 1) {
            return param(format!("label {l} is not binary"));
        }
        Ok(Self {
            width: map.width,
            height: map.height,
            data: map.labels.iter().map(|&l| l == 1).collect(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: bool) {
        self.data[y * self.width + x] = v;
    }

    /// Lookup that treats every pixel outside the frame as background.
    #[inline]
    pub fn get_or_bg(&self, x: isize, y: isize) -> bool {
        if x < 0 || y < 0 || x >= self.width as isize || y >= self.height as isize {
            false
        } else {
            self.get(x as usize, y as usize)
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn complement(&self) -> Self {
        Self {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| !b).collect(),
        }
    }

    /// Tight bounds of the foreground, or `None` for an empty mask.
    pub fn bounds(&self) -> Option<Rect> {
        let mut x0 = usize::MAX;
        let mut y0 = usize::MAX;
        let mut x1 = 0;
        let mut y1 = 0;
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    x0 = x0.min(x);
                    y0 = y0.min(y);
                    x1 = x1.max(x);
                    y1 = y1.max(y);
                }
            }
        }
        (x0 != usize::MAX).then(|| Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    pub fn crop(&self, r: Rect) -> Result<Self> {
        r.check_inside(self.width, self.height)?;
        Ok(Self::from_fn(r.w, r.h, |x, y| self.get(r.x + x, r.y + y)))
    }

    /// Places `window` into a background frame of the given size at `r`.
    pub fn embed(window: &BinaryMask, width: usize, height: usize, r: Rect) -> Result<Self> {
        r.check_inside(width, height)?;
        if window.dims() != (r.w, r.h) {
            return param("window mask does not match its placement rectangle");
        }
        let mut out = Self::zeros(width, height);
        for y in 0..r.h {
            for x in 0..r.w {
                out.set(r.x + x, r.y + y, window.get(x, y));
            }
        }
        Ok(out)
    }

    /// Intensity image with foreground at 1.0.
    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return param(format!("empty grid {width}x{height}"));
    }
    if width.checked_mul(height) != Some(len) {
        return param(format!(
            "grid of {width}x{height} needs {} values, got {len}",
            width * height
        ));
    }
    Ok(())
}
