use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::distance::squared_distance_transform;
use crate::error::{param, Error, Result};
use crate::image::{BinaryMask, LabelMap};

/// Per-pixel agreement counts, foreground = positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// Neither mask has any foreground, so Dice is defined by convention.
    pub fn both_empty(&self) -> bool {
        self.tp + self.fp + self.fn_ == 0
    }
}

fn check_same_dims(a: (usize, usize), b: (usize, usize)) -> Result<()> {
    if a != b {
        return param(format!("dimension mismatch: {}x{} vs {}x{}", a.0, a.1, b.0, b.1));
    }
    Ok(())
}

pub fn confusion(pred: &BinaryMask, truth: &BinaryMask) -> Result<ConfusionCounts> {
    check_same_dims(pred.dims(), truth.dims())?;
    let mut c = ConfusionCounts::default();
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        match (p, t) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

/// `2tp / (2tp + fp + fn)`; 1.0 when both masks are empty
/// (see [`ConfusionCounts::both_empty`]).
pub fn dice(c: &ConfusionCounts) -> f64 {
    if c.both_empty() {
        return 1.0;
    }
    (2 * c.tp) as f64 / (2 * c.tp + c.fp + c.fn_) as f64
}

/// `(tp + tn) / total`. This is pixel accuracy, not the pair-counting index.
pub fn rand_index(c: &ConfusionCounts) -> f64 {
    (c.tp + c.tn) as f64 / c.total() as f64
}

/// Joint label histogram plus both marginals.
struct Contingency {
    joint: BTreeMap<(u32, u32), u64>,
    a: BTreeMap<u32, u64>,
    b: BTreeMap<u32, u64>,
    n: u64,
}

impl Contingency {
    fn new(a: &LabelMap, b: &LabelMap) -> Result<Self> {
        check_same_dims(a.dims(), b.dims())?;
        let mut t = Contingency {
            joint: BTreeMap::new(),
            a: BTreeMap::new(),
            b: BTreeMap::new(),
            n: a.labels().len() as u64,
        };
        for (&la, &lb) in a.labels().iter().zip(b.labels()) {
            *t.joint.entry((la, lb)).or_default() += 1;
            *t.a.entry(la).or_default() += 1;
            *t.b.entry(lb).or_default() += 1;
        }
        Ok(t)
    }
}

/// Variation of information in bits, computed as `H(A|B) + H(B|A)`.
pub fn voi(a: &LabelMap, b: &LabelMap) -> Result<f64> {
    let t = Contingency::new(a, b)?;
    let n = t.n as f64;
    let mut acc = 0.0;
    for (&(la, lb), &nab) in &t.joint {
        let nab_f = nab as f64;
        let h_a_given_b = (t.b[&lb] as f64 / nab_f).log2();
        let h_b_given_a = (t.a[&la] as f64 / nab_f).log2();
        acc += nab_f / n * (h_a_given_b + h_b_given_a);
    }
    Ok(acc)
}

/// Global consistency error: the smaller of the two directional sums of
/// local refinement error, divided by the pixel count.
///
/// The local error at `p` is `|R(S1,p) \ R(S2,p)| / |R(S1,p)|`, with `R(S,p)`
/// the pixels sharing `p`'s label in `S`.
pub fn gce(a: &LabelMap, b: &LabelMap) -> Result<f64> {
    let t = Contingency::new(a, b)?;
    let (mut ab, mut ba) = (0.0, 0.0);
    for (&(la, lb), &nab) in &t.joint {
        let na = t.a[&la];
        let nb = t.b[&lb];
        ab += nab as f64 * (na - nab) as f64 / na as f64;
        ba += nab as f64 * (nb - nab) as f64 / nb as f64;
    }
    Ok(ab.min(ba) / t.n as f64)
}

/// Inner 4-connected boundary: foreground pixels with a background
/// 4-neighbour, where everything outside the frame counts as background.
pub fn boundary(m: &BinaryMask) -> Vec<bool> {
    let (w, h) = m.dims();
    let mut out = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            let (xi, yi) = (x as isize, y as isize);
            out[y * w + x] = [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .any(|&(dx, dy)| !m.get_or_bg(xi + dx, yi + dy));
        }
    }
    out
}

fn directed_boundary_error(from: &[bool], to_dt: &[f64]) -> f64 {
    let (sum, n) = from
        .iter()
        .zip(to_dt)
        .filter(|(&b, _)| b)
        .fold((0.0, 0usize), |(s, n), (_, &d2)| (s + d2.sqrt(), n + 1));
    sum / n as f64
}

/// Boundary displacement error in pixels: the mean of the two directed
/// average nearest-boundary distances.
pub fn bde(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    check_same_dims(a.dims(), b.dims())?;
    let (w, h) = a.dims();
    let ba = boundary(a);
    let bb = boundary(b);
    let dt_a = squared_distance_transform(&ba, w, h).ok_or(Error::EmptyBoundary)?;
    let dt_b = squared_distance_transform(&bb, w, h).ok_or(Error::EmptyBoundary)?;
    Ok((directed_boundary_error(&ba, &dt_b) + directed_boundary_error(&bb, &dt_a)) / 2.0)
}

fn differing(pred: &BinaryMask, truth: &BinaryMask) -> Result<(u64, u64)> {
    check_same_dims(pred.dims(), truth.dims())?;
    let diff = pred
        .data()
        .iter()
        .zip(truth.data())
        .filter(|(a, b)| a != b)
        .count() as u64;
    Ok((diff, pred.data().len() as u64))
}

const PEAK: f64 = 255.0;

/// PSNR in dB between the masks rendered at {0, 255}; `+inf` when identical.
pub fn psnr(pred: &BinaryMask, truth: &BinaryMask) -> Result<f64> {
    let (diff, n) = differing(pred, truth)?;
    if diff == 0 {
        return Ok(f64::INFINITY);
    }
    let mse = diff as f64 * PEAK * PEAK / n as f64;
    Ok(10.0 * (PEAK * PEAK / mse).log10())
}

/// Mean absolute difference between the masks rendered at {0, 255}.
pub fn mae(pred: &BinaryMask, truth: &BinaryMask) -> Result<f64> {
    let (diff, n) = differing(pred, truth)?;
    Ok(diff as f64 * PEAK / n as f64)
}

/// All segmentation scores for one predicted mask against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegReport {
    pub dice: f64,
    pub accuracy: f64,
    pub ri: f64,
    pub voi: f64,
    pub gce: f64,
    pub bde: f64,
    #[serde(serialize_with = "ser_psnr", deserialize_with = "de_psnr")]
    pub psnr: f64,
    pub mae: f64,
}

impl SegReport {
    /// Field names in report column order.
    pub const FIELDS: [&'static str; 8] = ["dice", "accuracy", "ri", "voi", "gce", "bde", "psnr", "mae"];

    pub fn values(&self) -> [f64; 8] {
        [
            self.dice,
            self.accuracy,
            self.ri,
            self.voi,
            self.gce,
            self.bde,
            self.psnr,
            self.mae,
        ]
    }
}

fn ser_psnr<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_infinite() && *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_f64(*v)
    }
}

fn de_psnr<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }
    match Repr::deserialize(d)? {
        Repr::Num(v) => Ok(v),
        Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
        Repr::Str(s) => Err(serde::de::Error::custom(format!("bad psnr value {s:?}"))),
    }
}

/// Computes every segmentation score for `pred` against `truth`.
///
/// BDE needs a boundary on both sides; identical masks (including two empty
/// ones) score 0 without that check.
pub fn evaluate_pair(pred: &BinaryMask, truth: &BinaryMask) -> Result<SegReport> {
    let c = confusion(pred, truth)?;
    let la = LabelMap::from(pred);
    let lb = LabelMap::from(truth);
    let bde = if pred == truth { 0.0 } else { bde(pred, truth)? };
    Ok(SegReport {
        dice: dice(&c),
        accuracy: rand_index(&c),
        ri: rand_index(&c),
        voi: voi(&la, &lb)?,
        gce: gce(&la, &lb)?,
        bde,
        psnr: psnr(pred, truth)?,
        mae: mae(pred, truth)?,
    })
}
