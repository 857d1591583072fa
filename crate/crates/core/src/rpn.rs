//! Region-proposal box arithmetic: anchors, IoU labeling, box deltas, the
//! classification + regression proposal loss, and ROI max pooling.

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::image::{BoundingBox, GrayImage};

pub const DEFAULT_SCALES: [f64; 3] = [128.0, 256.0, 512.0];
pub const DEFAULT_RATIOS: [f64; 3] = [0.5, 1.0, 2.0];
pub const DEFAULT_LAMBDA: f64 = 10.0;
pub const POSITIVE_IOU: f64 = 0.7;
pub const NEGATIVE_IOU: f64 = 0.3;

/// Log-loss probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]`.
pub const PROB_EPS: f64 = 1e-12;

/// Center-size box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl CenterBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { cx, cy, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.w > 0.0 && self.h > 0.0) || !self.cx.is_finite() || !self.cy.is_finite() {
            return param(format!("invalid box {self:?}"));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    fn corners(&self) -> (f64, f64, f64, f64) {
        (
            self.cx - self.w / 2.0,
            self.cy - self.h / 2.0,
            self.cx + self.w / 2.0,
            self.cy + self.h / 2.0,
        )
    }
}

/// One anchor per `(scale, ratio)` pair with area `scale²` and `w / h = ratio`,
/// scales in the outer loop.
pub fn generate_anchors(center: (f64, f64), scales: &[f64], ratios: &[f64]) -> Result<Vec<CenterBox>> {
    if scales.is_empty() || ratios.is_empty() {
        return param("scales and ratios must be non-empty");
    }
    if let Some(v) = scales
        .iter()
        .chain(ratios)
        .find(|&&v| !(v > 0.0 && v.is_finite()))
    {
        return param(format!("scale/ratio {v} must be positive"));
    }
    let mut out = Vec::with_capacity(scales.len() * ratios.len());
    for &s in scales {
        for &r in ratios {
            let root = r.sqrt();
            out.push(CenterBox::new(center.0, center.1, s * root, s / root)?);
        }
    }
    Ok(out)
}

pub fn default_anchors(center: (f64, f64)) -> Vec<CenterBox> {
    generate_anchors(center, &DEFAULT_SCALES, &DEFAULT_RATIOS).expect("default anchor set is valid")
}

pub fn iou(a: &CenterBox, b: &CenterBox) -> f64 {
    if a == b {
        return 1.0;
    }
    let (ax0, ay0, ax1, ay1) = a.corners();
    let (bx0, by0, bx1, by1) = b.corners();
    let iw = (ax1.min(bx1) - ax0.max(bx0)).max(0.0);
    let ih = (ay1.min(by1) - ay0.max(by0)).max(0.0);
    let inter = iw * ih;
    if inter == 0.0 {
        return 0.0;
    }
    (inter / (a.area() + b.area() - inter)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnchorLabel {
    Positive,
    Negative,
    Ignore,
}

impl AnchorLabel {
    /// IoU strictly above 0.7 is positive, strictly below 0.3 negative,
    /// everything else (both thresholds included) is ignored.
    pub fn from_iou(v: f64) -> Self {
        if v > POSITIVE_IOU {
            AnchorLabel::Positive
        } else if v < NEGATIVE_IOU {
            AnchorLabel::Negative
        } else {
            AnchorLabel::Ignore
        }
    }

    /// Target probability `p*`, `None` for ignored anchors.
    pub fn target(self) -> Option<f64> {
        match self {
            AnchorLabel::Positive => Some(1.0),
            AnchorLabel::Negative => Some(0.0),
            AnchorLabel::Ignore => None,
        }
    }
}

pub fn label_anchors(anchors: &[CenterBox], gt: &CenterBox) -> Vec<AnchorLabel> {
    anchors
        .iter()
        .map(|a| AnchorLabel::from_iou(iou(a, gt)))
        .collect()
}

/// Regression target of `target` relative to `anchor`:
/// `((x - xa)/wa, (y - ya)/ha, ln(w/wa), ln(h/ha))`.
pub fn parameterize(anchor: &CenterBox, target: &CenterBox) -> [f64; 4] {
    [
        (target.cx - anchor.cx) / anchor.w,
        (target.cy - anchor.cy) / anchor.h,
        (target.w / anchor.w).ln(),
        (target.h / anchor.h).ln(),
    ]
}

/// Inverse of [`parameterize`].
pub fn decode(anchor: &CenterBox, t: &[f64; 4]) -> CenterBox {
    CenterBox {
        cx: anchor.cx + t[0] * anchor.w,
        cy: anchor.cy + t[1] * anchor.h,
        w: anchor.w * t[2].exp(),
        h: anchor.h * t[3].exp(),
    }
}

/// Smooth-L1: `0.5x²` for `|x| < 1`, else `|x| - 0.5`.
pub fn smooth_robust_loss(x: f64) -> f64 {
    let a = x.abs();
    if a < 1.0 {
        0.5 * x * x
    } else {
        a - 0.5
    }
}

/// Summed smooth-L1 over the four coordinates of `t - t*`.
pub fn regression_loss(t: &[f64; 4], t_star: &[f64; 4]) -> f64 {
    t.iter().zip(t_star).map(|(a, b)| smooth_robust_loss(a - b)).sum()
}

/// Two-class log loss with clamped probability.
pub fn log_loss(p: f64, target: f64) -> f64 {
    let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
    -(target * p.ln() + (1.0 - target) * (1.0 - p).ln())
}

/// Everything the proposal loss needs for one mini-batch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBatch")]
pub struct AnchorBatch {
    pub anchors: Vec<CenterBox>,
    pub labels: Vec<AnchorLabel>,
    pub scores: Vec<f64>,
    pub t: Vec<[f64; 4]>,
    /// Present exactly for positive anchors.
    pub t_star: Vec<Option<[f64; 4]>>,
    pub lambda: f64,
    pub n_cls: usize,
    pub n_reg: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBatch {
    anchors: Vec<CenterBox>,
    labels: Vec<AnchorLabel>,
    scores: Vec<f64>,
    t: Vec<[f64; 4]>,
    t_star: Vec<Option<[f64; 4]>>,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    n_cls: Option<usize>,
    #[serde(default)]
    n_reg: Option<usize>,
}

impl TryFrom<RawBatch> for AnchorBatch {
    type Error = Error;

    fn try_from(r: RawBatch) -> Result<Self> {
        let n_cls = r.n_cls.unwrap_or_else(|| AnchorBatch::default_n_cls(&r.labels));
        let n_reg = r.n_reg.unwrap_or(r.anchors.len());
        let b = AnchorBatch {
            anchors: r.anchors,
            labels: r.labels,
            scores: r.scores,
            t: r.t,
            t_star: r.t_star,
            lambda: r.lambda.unwrap_or(DEFAULT_LAMBDA),
            n_cls,
            n_reg,
        };
        b.validate()?;
        Ok(b)
    }
}

impl AnchorBatch {
    /// Builds a batch with `N_cls` = non-ignored anchors, `N_reg` = all
    /// anchors and the default λ.
    pub fn new(
        anchors: Vec<CenterBox>,
        labels: Vec<AnchorLabel>,
        scores: Vec<f64>,
        t: Vec<[f64; 4]>,
        t_star: Vec<Option<[f64; 4]>>,
    ) -> Result<Self> {
        let b = Self {
            n_cls: Self::default_n_cls(&labels),
            n_reg: anchors.len(),
            anchors,
            labels,
            scores,
            t,
            t_star,
            lambda: DEFAULT_LAMBDA,
        };
        b.validate()?;
        Ok(b)
    }

    fn default_n_cls(labels: &[AnchorLabel]) -> usize {
        labels
            .iter()
            .filter(|&&l| l != AnchorLabel::Ignore)
            .count()
            .max(1)
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.anchors.len();
        if [
            self.labels.len(),
            self.scores.len(),
            self.t.len(),
            self.t_star.len(),
        ]
        .iter()
        .any(|&l| l != n)
        {
            return param("anchor batch lists differ in length");
        }
        for a in &self.anchors {
            a.validate()?;
        }
        if let Some(p) = self.scores.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return param(format!("score {p} outside [0, 1]"));
        }
        for (i, (label, ts)) in self.labels.iter().zip(&self.t_star).enumerate() {
            match (label, ts) {
                (AnchorLabel::Positive, None) => {
                    return param(format!("positive anchor {i} has no regression target"))
                }
                (AnchorLabel::Negative | AnchorLabel::Ignore, Some(_)) => {
                    return param(format!("non-positive anchor {i} carries a regression target"))
                }
                _ => {}
            }
        }
        if self.n_cls == 0 || self.n_reg == 0 {
            return param("n_cls and n_reg must be at least 1");
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return param(format!("lambda {} must be non-negative", self.lambda));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub total: f64,
    pub cls: f64,
    pub reg: f64,
}

/// `(1/N_cls)·Σ L_cls(p, p*) + λ·(1/N_reg)·Σ p*·L_reg(t, t*)`.
///
/// Ignored anchors contribute to neither sum; the regression sum only visits
/// positive anchors.
pub fn rpn_loss(batch: &AnchorBatch) -> Result<LossBreakdown> {
    batch.validate()?;
    let mut cls_sum = 0.0;
    let mut reg_sum = 0.0;
    for i in 0..batch.len() {
        let Some(target) = batch.labels[i].target() else {
            continue;
        };
        cls_sum += log_loss(batch.scores[i], target);
        if let (AnchorLabel::Positive, Some(ts)) = (batch.labels[i], &batch.t_star[i]) {
            reg_sum += regression_loss(&batch.t[i], ts);
        }
    }
    let cls = cls_sum / batch.n_cls as f64;
    let reg = batch.lambda * reg_sum / batch.n_reg as f64;
    Ok(LossBreakdown {
        total: cls + reg,
        cls,
        reg,
    })
}

/// Max-pools `region` of `feature` onto an `out_h`×`out_w` grid.
///
/// Cell boundaries along each axis sit at `floor(k·size/out)`.
pub fn roi_pool(
    feature: &GrayImage,
    region: &BoundingBox,
    out_h: usize,
    out_w: usize,
) -> Result<Vec<Vec<f64>>> {
    let (fw, fh) = feature.dims();
    let r = region.rect();
    r.check_inside(fw, fh)?;
    if out_h == 0 || out_w == 0 || out_h > r.h || out_w > r.w {
        return param(format!(
            "pooled size {out_h}x{out_w} must be between 1 and the region size {}x{}",
            r.h, r.w
        ));
    }
    let edges = |size: usize, out: usize| -> Vec<usize> { (0..=out).map(|k| k * size / out).collect() };
    let rows = edges(r.h, out_h);
    let cols = edges(r.w, out_w);
    let mut out = vec![vec![f64::NEG_INFINITY; out_w]; out_h];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            for y in rows[i]..rows[i + 1] {
                for x in cols[j]..cols[j + 1] {
                    *cell = cell.max(feature.get(r.x + x, r.y + y));
                }
            }
        }
    }
    Ok(out)
}
