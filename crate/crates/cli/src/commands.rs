//! Subcommand bodies. Each one computes everything in memory first and
//! only then stages its files, so a failure leaves the output directory
//! untouched.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::{debug, info};
use rayon::prelude::*;
use segkit::acwe::{self, RunStats};
use segkit::edge::segment_baseline;
use segkit::image::{load_image, load_mask, map_bbox};
use segkit::metrics::{boundary, evaluate_pair, SegReport};
use segkit::phantom::{generate, PhantomSpec};
use segkit::rpn::{
    default_anchors, generate_anchors, iou, label_anchors, rpn_loss, AnchorBatch, AnchorLabel, CenterBox,
    LossBreakdown,
};
use segkit::{BinaryMask, Frame, GrayImage};
use serde::Serialize;

use crate::config::{Method, RunConfig};
use crate::record::{BboxFile, CaseRecord, Manifest};
use crate::report::{aggregate, render_text, AggregateReport};
use crate::stage::Staging;

/// Inputs for one segmentation run.
#[derive(Debug, Clone)]
pub struct CaseInput {
    pub id: String,
    pub image: PathBuf,
    pub bbox: PathBuf,
    pub truth: Option<PathBuf>,
    pub method: Method,
}

#[derive(Debug, Clone)]
pub struct CaseOutput {
    pub record: CaseRecord,
    pub mask: BinaryMask,
    pub image: GrayImage,
}

/// Loads, segments and (given a truth mask) scores one case.
pub fn run_case(cfg: &RunConfig, input: &CaseInput) -> Result<CaseOutput> {
    let image_path = cfg.input_path(&input.image);
    let bbox_path = cfg.input_path(&input.bbox);
    let img = load_image(&image_path)?;
    let bfile = BboxFile::load(&bbox_path)?;
    let native = Frame::for_dims(img.width(), img.height());
    let bbox = if bfile.bbox.frame.dims() == native.dims() {
        bfile.bbox
    } else {
        let mapped = map_bbox(&bfile.bbox, native);
        info!("{}: mapped box {:?} to {:?}", input.id, bfile.bbox, mapped);
        mapped
    };

    let (mask, stats): (BinaryMask, Option<RunStats>) = match input.method {
        Method::Chanvese => {
            let (m, s) = acwe::segment(&img, &bbox, &cfg.acwe)?;
            debug!(
                "{}: {} iterations, converged={}",
                input.id, s.iterations, s.converged
            );
            (m, Some(s))
        }
        m => (segment_baseline(&img, &bbox, &cfg.edge_for(m))?, None),
    };

    let (truth, report) = match &input.truth {
        Some(t) => {
            let path = cfg.input_path(t);
            let truth = load_mask(&path)?;
            let report =
                evaluate_pair(&mask, &truth).with_context(|| format!("scoring case {}", input.id))?;
            (Some(path.display().to_string()), Some(report))
        }
        None => (None, None),
    };
    let record = CaseRecord {
        case_id: input.id.clone(),
        image: image_path.display().to_string(),
        bbox,
        truth,
        method: input.method,
        report,
        stats,
        confidence: bfile.confidence,
    };
    record.validate()?;
    Ok(CaseOutput {
        record,
        mask,
        image: img,
    })
}

/// The input image with the mask's boundary drawn at full intensity.
pub fn overlay(img: &GrayImage, mask: &BinaryMask) -> GrayImage {
    let edge = boundary(mask);
    let w = img.width();
    GrayImage::from_fn(
        w,
        img.height(),
        |x, y| if edge[y * w + x] { 1.0 } else { img.get(x, y) },
    )
}

fn stage_case(stage: &mut Staging, cfg: &RunConfig, out: &CaseOutput, with_overlay: bool) -> Result<()> {
    let stem = CaseRecord::stem(&out.record.case_id, out.record.method);
    stage.mask(
        &format!("{stem}.mask.{}", cfg.io.mask_format.extension()),
        &out.mask,
    )?;
    if let Some(stats) = &out.record.stats {
        stage.json(&format!("{stem}.stats.json"), stats)?;
    }
    stage.json(&format!("{stem}{}", CaseRecord::SUFFIX), &out.record)?;
    if with_overlay {
        stage.image(&format!("{stem}.overlay.png"), &overlay(&out.image, &out.mask))?;
    }
    Ok(())
}

/// `segment`: writes the mask, stats and case record (and optionally an
/// overlay) into the output directory.
pub fn segment(cfg: &RunConfig, input: &CaseInput, with_overlay: bool) -> Result<(CaseRecord, Vec<PathBuf>)> {
    let out = run_case(cfg, input)?;
    let mut stage = Staging::new(&cfg.io.output);
    stage_case(&mut stage, cfg, &out, with_overlay)?;
    Ok((out.record, stage.commit()?))
}

/// `evaluate`: scores `pred` against `truth` and writes `evaluation.json`.
pub fn evaluate(cfg: &RunConfig, pred: &Path, truth: &Path) -> Result<SegReport> {
    let p = load_mask(cfg.input_path(pred))?;
    let t = load_mask(cfg.input_path(truth))?;
    let report = evaluate_pair(&p, &t)?;
    let mut stage = Staging::new(&cfg.io.output);
    stage.json("evaluation.json", &report)?;
    stage.commit()?;
    Ok(report)
}

/// `phantom`: writes `image`, `mask` and `bbox.json`. A configured seed
/// replaces the spec's.
pub fn phantom(cfg: &RunConfig, spec_path: &Path) -> Result<(PhantomSpec, Vec<PathBuf>)> {
    let path = cfg.input_path(spec_path);
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    let mut spec: PhantomSpec =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(seed) = cfg.seed {
        spec.seed = seed;
    }
    let ph = generate(&spec)?;
    let ext = cfg.io.mask_format.extension();
    let mut stage = Staging::new(&cfg.io.output);
    stage.image(&format!("image.{ext}"), &ph.image)?;
    stage.mask(&format!("mask.{ext}"), &ph.mask)?;
    stage.json(
        "bbox.json",
        &BboxFile {
            bbox: ph.bbox,
            confidence: None,
        },
    )?;
    Ok((spec, stage.commit()?))
}

fn stage_report(agg: &AggregateReport, stage: &mut Staging) -> Result<String> {
    let text = render_text(agg);
    stage.json("report.json", agg)?;
    stage.bytes("report.txt", text.as_bytes())?;
    Ok(text)
}

/// `report`: aggregates every case record in `dir`.
pub fn report(cfg: &RunConfig, dir: &Path) -> Result<(AggregateReport, String)> {
    let dir = cfg.input_path(dir);
    let records = CaseRecord::load_dir(&dir)?;
    if records.is_empty() {
        bail!("no *{} files in {}", CaseRecord::SUFFIX, dir.display());
    }
    let agg = aggregate(&records)?;
    let mut stage = Staging::new(&cfg.io.output);
    let text = stage_report(&agg, &mut stage)?;
    stage.commit()?;
    Ok((agg, text))
}

/// `batch`: runs every manifest case under every method on a pool of
/// `cfg.parallelism` threads, then writes all case artifacts and the
/// aggregate report together.
pub fn batch(cfg: &RunConfig, manifest_path: &Path, methods: &[Method]) -> Result<AggregateReport> {
    let manifest = Manifest::load(&cfg.input_path(manifest_path))?;
    let methods: Vec<Method> = match (methods.is_empty(), manifest.methods.is_empty()) {
        (false, _) => methods.to_vec(),
        (true, false) => manifest.methods.clone(),
        (true, true) => vec![Method::Chanvese],
    };
    let inputs: Vec<CaseInput> = manifest
        .cases
        .iter()
        .flat_map(|c| {
            methods.iter().map(move |&method| CaseInput {
                id: c.id.clone(),
                image: c.image.clone(),
                bbox: c.bbox.clone(),
                truth: c.truth.clone(),
                method,
            })
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .context("starting worker pool")?;
    info!("running {} cases on {} workers", inputs.len(), cfg.parallelism);
    let outputs: Vec<CaseOutput> = pool.install(|| {
        inputs
            .par_iter()
            .map(|input| run_case(cfg, input).with_context(|| format!("case {}", input.id)))
            .collect::<Result<_>>()
    })?;

    let records: Vec<CaseRecord> = outputs.iter().map(|o| o.record.clone()).collect();
    let agg = aggregate(&records)?;
    let mut stage = Staging::new(&cfg.io.output);
    for out in &outputs {
        stage_case(&mut stage, cfg, out, false)?;
    }
    stage_report(&agg, &mut stage)?;
    stage.commit()?;
    Ok(agg)
}

/// Anchor-generation request for `rpn-demo`.
#[derive(Debug, Clone, serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct AnchorRequest {
    #[serde(default = "default_center")]
    center: (f64, f64),
    #[serde(default)]
    scales: Option<Vec<f64>>,
    #[serde(default)]
    ratios: Option<Vec<f64>>,
    /// Ground-truth box used to label the generated anchors.
    #[serde(default)]
    gt: Option<CenterBox>,
}

fn default_center() -> (f64, f64) {
    (320.0, 320.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnchorEntry {
    #[serde(flatten)]
    pub anchor: CenterBox,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<AnchorLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iou: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RpnDemo {
    pub anchors: Vec<AnchorEntry>,
    pub loss: Option<LossBreakdown>,
}

/// `rpn-demo`: with an `anchors` key the input is a full anchor batch and
/// the loss is evaluated. Otherwise it is a generation request (center,
/// optional scales/ratios/gt) and the anchors are listed, labeled against
/// `gt` when given.
pub fn rpn_demo(text: &str) -> Result<RpnDemo> {
    let value: serde_json::Value = serde_json::from_str(text).context("malformed JSON")?;
    if value.get("anchors").is_some() {
        let batch: AnchorBatch = serde_json::from_value(value).context("invalid anchor batch")?;
        let loss = rpn_loss(&batch)?;
        let anchors = batch
            .anchors
            .iter()
            .zip(&batch.labels)
            .map(|(&anchor, &label)| AnchorEntry {
                anchor,
                label: Some(label),
                iou: None,
            })
            .collect();
        return Ok(RpnDemo {
            anchors,
            loss: Some(loss),
        });
    }
    let req: AnchorRequest = serde_json::from_value(value).context("invalid anchor request")?;
    let anchors = match (&req.scales, &req.ratios) {
        (None, None) => default_anchors(req.center),
        (s, r) => generate_anchors(
            req.center,
            s.as_deref().unwrap_or(&segkit::rpn::DEFAULT_SCALES),
            r.as_deref().unwrap_or(&segkit::rpn::DEFAULT_RATIOS),
        )?,
    };
    let entries = match &req.gt {
        Some(gt) => {
            gt.validate()?;
            anchors
                .iter()
                .zip(label_anchors(&anchors, gt))
                .map(|(&anchor, label)| AnchorEntry {
                    anchor,
                    label: Some(label),
                    iou: Some(iou(&anchor, gt)),
                })
                .collect()
        }
        None => anchors
            .into_iter()
            .map(|anchor| AnchorEntry {
                anchor,
                label: None,
                iou: None,
            })
            .collect(),
    };
    Ok(RpnDemo {
        anchors: entries,
        loss: None,
    })
}
