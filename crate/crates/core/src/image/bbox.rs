use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Coordinate frame a bounding box is expressed in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Frame {
    /// The 128×128 detector input.
    #[serde(rename = "downsampled128")]
    Downsampled128,
    /// The 512×512 acquisition grid.
    #[serde(rename = "native512")]
    Native512,
    #[serde(rename = "custom")]
    Custom(u32, u32),
}

impl Frame {
    pub fn dims(self) -> (u32, u32) {
        match self {
            Frame::Downsampled128 => (128, 128),
            Frame::Native512 => (512, 512),
            Frame::Custom(w, h) => (w, h),
        }
    }

    /// The named frame for these dimensions, falling back to `Custom`.
    pub fn for_dims(width: usize, height: usize) -> Frame {
        match (width, height) {
            (128, 128) => Frame::Downsampled128,
            (512, 512) => Frame::Native512,
            (w, h) => Frame::Custom(w as u32, h as u32),
        }
    }
}

/// Integer rectangle `(x, y, w, h)` in pixels, without a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

impl Rect {
    pub const fn new(x: usize, y: usize, w: usize, h: usize) -> Self {
        Self { x, y, w, h }
    }

    pub fn right(&self) -> usize {
        self.x + self.w
    }

    pub fn bottom(&self) -> usize {
        self.y + self.h
    }

    pub fn area(&self) -> usize {
        self.w * self.h
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn check_inside(&self, width: usize, height: usize) -> Result<()> {
        if self.w == 0 || self.h == 0 || self.right() > width || self.bottom() > height {
            return param(format!(
                "rectangle ({}, {}, {}, {}) does not fit a {width}x{height} frame",
                self.x, self.y, self.w, self.h
            ));
        }
        Ok(())
    }

    /// Grows by `pad` on every side, clipped to the frame.
    pub fn dilate(&self, pad: usize, width: usize, height: usize) -> Rect {
        let x = self.x.saturating_sub(pad);
        let y = self.y.saturating_sub(pad);
        let right = (self.right() + pad).min(width);
        let bottom = (self.bottom() + pad).min(height);
        Rect::new(x, y, right - x, bottom - y)
    }

    /// Same rectangle in coordinates relative to `origin`'s top-left corner.
    pub fn relative_to(&self, origin: Rect) -> Rect {
        Rect::new(self.x - origin.x, self.y - origin.y, self.w, self.h)
    }
}

/// Axis-aligned box in a named frame. Always non-empty and inside its frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawBox")]
pub struct BoundingBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub frame: Frame,
}

#[derive(Deserialize)]
struct RawBox {
    x: u32,
    y: u32,
    w: u32,
    h: u32,
    frame: Frame,
}

impl TryFrom<RawBox> for BoundingBox {
    type Error = Error;

    fn try_from(r: RawBox) -> Result<Self> {
        BoundingBox::new(r.x, r.y, r.w, r.h, r.frame)
    }
}

impl BoundingBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32, frame: Frame) -> Result<Self> {
        let (fw, fh) = frame.dims();
        if fw == 0 || fh == 0 {
            return param("frame dimensions must be positive");
        }
        if w == 0 || h == 0 {
            return param(format!("box size {w}x{h} must be positive"));
        }
        if u64::from(x) + u64::from(w) > u64::from(fw) || u64::from(y) + u64::from(h) > u64::from(fh) {
            return param(format!(
                "box ({x}, {y}, {w}, {h}) extends outside the {fw}x{fh} frame"
            ));
        }
        Ok(Self { x, y, w, h, frame })
    }

    pub fn from_rect(r: Rect, frame: Frame) -> Result<Self> {
        let cast = |v: usize| u32::try_from(v).map_err(|_| Error::Parameter("box too large".into()));
        Self::new(cast(r.x)?, cast(r.y)?, cast(r.w)?, cast(r.h)?, frame)
    }

    pub fn rect(&self) -> Rect {
        Rect::new(self.x as usize, self.y as usize, self.w as usize, self.h as usize)
    }
}

/// Rescales `b` from its own frame into `to`.
///
/// Each coordinate is scaled by the frame ratio and rounded half-up, then
/// clamped so the result is non-empty and inside `to`.
pub fn map_bbox(b: &BoundingBox, to: Frame) -> BoundingBox {
    if b.frame == to {
        return *b;
    }
    let (fw, fh) = b.frame.dims();
    let (tw, th) = to.dims();
    let sx = f64::from(tw) / f64::from(fw);
    let sy = f64::from(th) / f64::from(fh);
    let round = |v: f64| (v + 0.5).floor().max(0.0) as u64;

    let (x, w) = clamp_span(round(f64::from(b.x) * sx), round(f64::from(b.w) * sx), tw);
    let (y, h) = clamp_span(round(f64::from(b.y) * sy), round(f64::from(b.h) * sy), th);
    BoundingBox {
        x,
        y,
        w,
        h,
        frame: to,
    }
}

fn clamp_span(start: u64, len: u64, extent: u32) -> (u32, u32) {
    let extent = u64::from(extent);
    let start = start.min(extent - 1);
    let len = len.clamp(1, extent - start);
    (start as u32, len as u32)
}
