//! Seeded synthetic "tumor" images with exact ground truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::image::{BinaryMask, BoundingBox, Frame, GrayImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Disk { cx: f64, cy: f64, r: f64 },
    Square { cx: f64, cy: f64, side: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
}

impl Shape {
    /// Whether the pixel center `(x, y)` is inside the shape.
    pub fn contains(&self, x: f64, y: f64) -> bool {
        match *self {
            Shape::Disk { cx, cy, r } => (x - cx).powi(2) + (y - cy).powi(2) <= r * r,
            Shape::Square { cx, cy, side } => (x - cx).abs() <= side / 2.0 && (y - cy).abs() <= side / 2.0,
            Shape::Ellipse { cx, cy, rx, ry } => ((x - cx) / rx).powi(2) + ((y - cy) / ry).powi(2) <= 1.0,
        }
    }

    fn extent(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Disk { cx, cy, r } => (cx, cy, r, r),
            Shape::Square { cx, cy, side } => (cx, cy, side / 2.0, side / 2.0),
            Shape::Ellipse { cx, cy, rx, ry } => (cx, cy, rx, ry),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhantomSpec {
    /// `(width, height)` in pixels.
    pub frame: (usize, usize),
    pub shape: Shape,
    pub fg_intensity: f64,
    pub bg_intensity: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl PhantomSpec {
    /// Centered disk of radius `r` in a `size`×`size` frame.
    pub fn disk(size: usize, r: f64, fg: f64, bg: f64, sigma: f64, seed: u64) -> Self {
        let c = (size as f64 - 1.0) / 2.0;
        Self {
            frame: (size, size),
            shape: Shape::Disk { cx: c, cy: c, r },
            fg_intensity: fg,
            bg_intensity: bg,
            noise_sigma: sigma,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (w, h) = self.frame;
        if w == 0 || h == 0 {
            return param("phantom frame must be non-empty");
        }
        for (name, v) in [
            ("fg_intensity", self.fg_intensity),
            ("bg_intensity", self.bg_intensity),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return param(format!("{name} {v} outside [0, 1]"));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return param(format!("noise_sigma {} must be >= 0", self.noise_sigma));
        }
        if self.noise_sigma > 0.0 && self.fg_intensity == self.bg_intensity {
            return param("noisy phantoms need fg_intensity != bg_intensity");
        }
        let (cx, cy, ex, ey) = self.shape.extent();
        if !(ex > 0.0 && ey > 0.0) {
            return param("shape size must be positive");
        }
        if cx - ex < 0.0 || cy - ey < 0.0 || cx + ex > (w - 1) as f64 || cy + ey > (h - 1) as f64 {
            return param(format!("shape does not fit inside the {w}x{h} frame"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub image: GrayImage,
    pub mask: BinaryMask,
    pub bbox: BoundingBox,
}

/// Rasterizes the shape, paints a two-level image, corrupts it with Rician
/// noise and reports the tight box around the mask.
pub fn generate(spec: &PhantomSpec) -> Result<Phantom> {
    spec.validate()?;
    let (w, h) = spec.frame;
    let mask = BinaryMask::from_fn(w, h, |x, y| spec.shape.contains(x as f64, y as f64));
    let bounds = match mask.bounds() {
        Some(r) => r,
        None => return param("shape covers no pixel centers"),
    };
    let clean = GrayImage::from_fn(w, h, |x, y| {
        if mask.get(x, y) {
            spec.fg_intensity
        } else {
            spec.bg_intensity
        }
    });
    let image = rician_corrupt(&clean, spec.noise_sigma, spec.seed)?;
    let bbox = BoundingBox::from_rect(bounds, Frame::for_dims(w, h))?;
    Ok(Phantom { image, mask, bbox })
}

/// Magnitude of the signal plus complex Gaussian noise, clipped to `[0, 1]`.
///
/// Noise pairs are drawn in row-major order from a ChaCha8 stream seeded by
/// `seed`.
pub fn rician_corrupt(img: &GrayImage, sigma: f64, seed: u64) -> Result<GrayImage> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return param(format!("sigma {sigma} must be >= 0"));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|e| crate::Error::Parameter(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(img.map(|v| {
        let re = v + normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        (re * re + im * im).sqrt().clamp(0.0, 1.0)
    }))
}
