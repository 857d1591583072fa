//! Morphological active contours without edges.
//!
//! The contour is the boundary of a binary set `u` (1 inside). Each step
//! recomputes the inside/outside means `c1`, `c2`, lets every pixel in the
//! one-pixel band around the boundary join whichever region it fits better
//! under the λ-weighted squared deviation, then applies the SI/IS curvature
//! operators a fixed number of times. The curvature passes stand in for the
//! length penalty of the energy functional; there is no explicit μ weight.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::image::{
    contrast_stretch, histogram_equalize, BinaryMask, BoundingBox, Frame, GrayImage, Rect,
    DEFAULT_STRETCH_HI, DEFAULT_STRETCH_LO,
};
use crate::morph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcweParams {
    /// Weight of the inside fitting term.
    pub lambda1: f64,
    /// Weight of the outside fitting term.
    pub lambda2: f64,
    /// Upper bound on evolution steps.
    pub iterations: usize,
    /// Curvature operator applications per step.
    pub smoothing_passes: usize,
    /// Inset of the initial square from the box, in pixels.
    pub init_margin: usize,
}

impl Default for AcweParams {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
            iterations: 100,
            smoothing_passes: 8,
            init_margin: 0,
        }
    }
}

impl AcweParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda1 > 0.0 && self.lambda1.is_finite())
            || !(self.lambda2 > 0.0 && self.lambda2.is_finite())
        {
            return param(format!(
                "lambda1 and lambda2 must be positive, got {} and {}",
                self.lambda1, self.lambda2
            ));
        }
        if self.iterations == 0 {
            return param("iterations must be at least 1");
        }
        Ok(())
    }
}

/// Mean intensity inside (`c1`) and outside (`c2`) the current set.
///
/// An empty region has mean 0 and its flag set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionMeans {
    pub c1: f64,
    pub c2: f64,
    pub inside_empty: bool,
    pub outside_empty: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LevelSetState {
    /// Characteristic function, `true` inside the contour.
    pub u: BinaryMask,
    /// Means from the most recent step; `None` before the first step.
    pub means: Option<RegionMeans>,
    pub iteration: usize,
    pub converged: bool,
}

impl LevelSetState {
    pub fn new(u: BinaryMask) -> Self {
        Self {
            u,
            means: None,
            iteration: 0,
            converged: false,
        }
    }

    pub fn c1(&self) -> Option<f64> {
        self.means.map(|m| m.c1)
    }

    pub fn c2(&self) -> Option<f64> {
        self.means.map(|m| m.c2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunStats {
    pub iterations: usize,
    pub converged: bool,
    pub c1: f64,
    pub c2: f64,
}

/// Square level set: `u = 1` on `square` inset by `margin`, 0 elsewhere.
///
/// The working window is the box's frame, so the box must already be in
/// window coordinates.
pub fn init_square(square: &BoundingBox, margin: usize) -> Result<LevelSetState> {
    let (ww, wh) = square.frame.dims();
    let r = square.rect();
    if 2 * margin >= r.w || 2 * margin >= r.h {
        return param(format!(
            "margin {margin} collapses the {}x{} initial square",
            r.w, r.h
        ));
    }
    let inner = Rect::new(r.x + margin, r.y + margin, r.w - 2 * margin, r.h - 2 * margin);
    let u = BinaryMask::from_fn(ww as usize, wh as usize, |x, y| inner.contains(x, y));
    Ok(LevelSetState::new(u))
}

pub fn region_means(img: &GrayImage, u: &BinaryMask) -> Result<RegionMeans> {
    if img.dims() != u.dims() {
        return param("image and level set dimensions differ");
    }
    // sums are offsets from one reference pixel so a constant image gives
    // bit-identical means on both sides
    let reference = img.data()[0];
    let (mut s_in, mut n_in, mut s_out, mut n_out) = (0.0, 0usize, 0.0, 0usize);
    for (&v, &inside) in img.data().iter().zip(u.data()) {
        if inside {
            s_in += v - reference;
            n_in += 1;
        } else {
            s_out += v - reference;
            n_out += 1;
        }
    }
    let mean = |s: f64, n: usize| if n == 0 { 0.0 } else { reference + s / n as f64 };
    Ok(RegionMeans {
        c1: mean(s_in, n_in),
        c2: mean(s_out, n_out),
        inside_empty: n_in == 0,
        outside_empty: n_out == 0,
    })
}

/// Applies the curvature operator `passes` times, alternating SI∘IS on even
/// passes with IS∘SI on odd ones.
pub fn smooth(u: &BinaryMask, passes: usize) -> BinaryMask {
    let mut cur = u.clone();
    for pass in 0..passes {
        cur = if pass % 2 == 0 {
            morph::sup_inf(&morph::inf_sup(&cur))
        } else {
            morph::inf_sup(&morph::sup_inf(&cur))
        };
    }
    cur
}

/// One evolution step.
pub fn acwe_step(img: &GrayImage, state: &LevelSetState, params: &AcweParams) -> Result<LevelSetState> {
    let means = region_means(img, &state.u)?;
    let iteration = state.iteration + 1;
    if means.c1 == means.c2 {
        return Ok(LevelSetState {
            u: state.u.clone(),
            means: Some(means),
            iteration,
            converged: true,
        });
    }

    let band = morph::gradient_band(&state.u);
    let (w, h) = state.u.dims();
    let mut next = state.u.clone();
    for y in 0..h {
        for x in 0..w {
            if band[y * w + x] {
                let v = img.get(x, y);
                let inside = params.lambda1 * (v - means.c1).powi(2);
                let outside = params.lambda2 * (v - means.c2).powi(2);
                next.set(x, y, inside < outside);
            }
        }
    }
    let next = smooth(&next, params.smoothing_passes);
    let converged = next == state.u;
    Ok(LevelSetState {
        u: next,
        means: Some(means),
        iteration,
        converged,
    })
}

/// Padding added around a detector box before cropping: 10% of the larger
/// side, at least 4 pixels.
pub fn window_pad(b: &BoundingBox) -> usize {
    let side = b.w.max(b.h) as f64;
    ((0.1 * side).round() as usize).max(4)
}

/// The working window for `b` inside a `width`×`height` image.
pub fn working_window(b: &BoundingBox, width: usize, height: usize) -> Result<Rect> {
    if b.frame.dims() != (width as u32, height as u32) {
        let (fw, fh) = b.frame.dims();
        return param(format!(
            "box is in a {fw}x{fh} frame but the image is {width}x{height}"
        ));
    }
    let r = b.rect();
    r.check_inside(width, height)?;
    Ok(r.dilate(window_pad(b), width, height))
}

/// Contrast stretch followed by histogram equalization.
pub fn preprocess_window(window: &GrayImage) -> Result<GrayImage> {
    let stretched = contrast_stretch(window, DEFAULT_STRETCH_LO, DEFAULT_STRETCH_HI)?;
    Ok(histogram_equalize(&stretched))
}

/// Segments the object inside `b`.
///
/// Crops the padded window, preprocesses it, starts from the square at `b`
/// and evolves until convergence or `params.iterations` steps. The result
/// is re-embedded into a full-size mask.
pub fn segment(img: &GrayImage, b: &BoundingBox, params: &AcweParams) -> Result<(BinaryMask, RunStats)> {
    params.validate()?;
    let (width, height) = img.dims();
    let window = working_window(b, width, height)?;
    let sub = preprocess_window(&img.crop(window)?)?;

    let seed = BoundingBox::from_rect(
        b.rect().relative_to(window),
        Frame::Custom(window.w as u32, window.h as u32),
    )?;
    let mut state = init_square(&seed, params.init_margin)?;
    for _ in 0..params.iterations {
        state = acwe_step(&sub, &state, params)?;
        if state.converged {
            break;
        }
    }
    let means = region_means(&sub, &state.u)?;
    let stats = RunStats {
        iterations: state.iteration,
        converged: state.converged,
        c1: means.c1,
        c2: means.c2,
    };
    let u = if explained_variance(&sub, &state.u, &means) < MIN_EXPLAINED_VARIANCE {
        BinaryMask::zeros(window.w, window.h)
    } else {
        state.u
    };
    Ok((BinaryMask::embed(&u, width, height, window)?, stats))
}

/// Below this share of window variance explained by the inside/outside split,
/// [`segment`] reports an empty mask: the window holds no object.
pub const MIN_EXPLAINED_VARIANCE: f64 = 0.1;

/// Between-region variance over total variance of `img` for the split `u`.
/// Zero for a constant image or an empty region.
pub fn explained_variance(img: &GrayImage, u: &BinaryMask, means: &RegionMeans) -> f64 {
    if means.inside_empty || means.outside_empty {
        return 0.0;
    }
    let n = img.data().len() as f64;
    let mean = img.data().iter().sum::<f64>() / n;
    let var = img.data().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    if var <= 0.0 {
        return 0.0;
    }
    let w_in = u.count() as f64 / n;
    w_in * (1.0 - w_in) * (means.c1 - means.c2).powi(2) / var
}
