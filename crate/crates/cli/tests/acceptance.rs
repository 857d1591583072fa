//! Acceptance criteria, one `[PASS]`/`[FAIL]` line each. Exits nonzero if
//! any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{oracles, random_blobs, random_labels, random_mask, rng};
use rand::Rng;
use segkit::acwe::{self, AcweParams};
use segkit::edge::{segment_baseline, EdgeParams};
use segkit::image::{save_image, save_mask};
use segkit::metrics::{
    bde, cls_stats, cohen_kappa, dice, evaluate_pair, gce, roc_auc, voi, ClassLabel, ConfusionCounts,
    ScoredSample,
};
use segkit::phantom::{generate, PhantomSpec};
use segkit::rpn::{default_anchors, label_anchors, roi_pool, rpn_loss, AnchorBatch, AnchorLabel, CenterBox};
use segkit::{BinaryMask, BoundingBox, Frame, GrayImage, LabelMap};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn nonempty_mask(r: &mut rand_chacha::ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    loop {
        let m = if r.random_bool(0.5) {
            random_blobs(r, w, h)
        } else {
            let density = r.random_range(0.1..0.9);
            random_mask(r, w, h, density)
        };
        if !m.is_empty() {
            return m;
        }
    }
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut r = rng(101);
    let (mut dv, mut dg, mut db) = (0.0f64, 0.0f64, 0.0f64);
    for i in 0..200 {
        let (a, b) = if i % 2 == 0 {
            let ka = r.random_range(1..6);
            let kb = r.random_range(1..6);
            (
                random_labels(&mut r, 16, 16, ka),
                random_labels(&mut r, 16, 16, kb),
            )
        } else {
            (
                LabelMap::from(&nonempty_mask(&mut r, 16, 16)),
                LabelMap::from(&nonempty_mask(&mut r, 16, 16)),
            )
        };
        dv = dv.max((voi(&a, &b).map_err(|e| e.to_string())? - oracles::voi(&a, &b)).abs());
        dg = dg.max((gce(&a, &b).map_err(|e| e.to_string())? - oracles::gce(&a, &b)).abs());

        let ma = nonempty_mask(&mut r, 16, 16);
        let mb = nonempty_mask(&mut r, 16, 16);
        let want = oracles::bde(&ma, &mb).ok_or("oracle found an empty boundary")?;
        db = db.max((bde(&ma, &mb).map_err(|e| e.to_string())? - want).abs());
    }
    let t = start.elapsed();
    let msg = format!("200 pairs, max |err| voi={dv:.1e} gce={dg:.1e} bde={db:.1e}, {t:.2?}");
    check(dv <= 1e-9 && dg <= 1e-9 && db <= 1e-9, msg.clone())?;
    check(t < Duration::from_secs(10), format!("too slow: {msg}"))?;
    Ok(msg)
}

fn identity() -> Outcome {
    let mut r = rng(202);
    for i in 0..50 {
        let density = [0.0, 0.02, 0.3, 0.5, 0.8, 1.0][i % 6];
        let m = if i % 3 == 2 {
            random_blobs(&mut r, 24, 20)
        } else {
            random_mask(&mut r, 24, 20, density)
        };
        let rep = evaluate_pair(&m, &m).map_err(|e| e.to_string())?;
        let json = serde_json::to_value(rep).map_err(|e| e.to_string())?;
        let exact = rep.dice == 1.0
            && rep.ri == 1.0
            && rep.accuracy == 1.0
            && rep.voi == 0.0
            && rep.gce == 0.0
            && rep.bde == 0.0
            && rep.mae == 0.0
            && rep.psnr == f64::INFINITY
            && json["psnr"] == "inf";
        check(exact, format!("mask {i}: {rep:?}"))?;
    }
    Ok("50 masks, every field exact, psnr serialized as \"inf\"".into())
}

fn disk_phantom(seed: u64) -> PhantomSpec {
    PhantomSpec::disk(512, 40.0, 0.75, 0.25, 0.1, seed)
}

fn chanvese_regression() -> Outcome {
    let ph = generate(&disk_phantom(7)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (mask, stats) =
        acwe::segment(&ph.image, &ph.bbox, &AcweParams::default()).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    let d = dice(&segkit::metrics::confusion(&mask, &ph.mask).map_err(|e| e.to_string())?);
    let msg = format!("dice={d:.4}, {} iterations, {t:.2?}", stats.iterations);
    check(
        d >= 0.95 && stats.iterations <= 100 && t < Duration::from_secs(5),
        msg.clone(),
    )?;
    Ok(msg)
}

/// Seeded disks of varying radius and position, contrast 0.5, σ = 0.1.
fn ordering_phantom(seed: u64) -> PhantomSpec {
    let mut r = rng(1000 + seed);
    let radius = r.random_range(25.0..60.0);
    let cx = r.random_range(150.0..360.0);
    let cy = r.random_range(150.0..360.0);
    let mut spec = disk_phantom(seed);
    spec.shape = segkit::phantom::Shape::Disk { cx, cy, r: radius };
    spec
}

fn method_ordering() -> Outcome {
    let (mut cv_dice, mut cv_bde, mut pw_dice, mut pw_bde) = (0.0, 0.0, 0.0, 0.0);
    let n = 20;
    for seed in 0..n {
        let ph = generate(&ordering_phantom(seed)).map_err(|e| e.to_string())?;
        let (cv, _) =
            acwe::segment(&ph.image, &ph.bbox, &AcweParams::default()).map_err(|e| e.to_string())?;
        let pw = segment_baseline(&ph.image, &ph.bbox, &EdgeParams::default()).map_err(|e| e.to_string())?;
        let rc = evaluate_pair(&cv, &ph.mask).map_err(|e| format!("chanvese seed {seed}: {e}"))?;
        let rp = evaluate_pair(&pw, &ph.mask).map_err(|e| format!("prewitt seed {seed}: {e}"))?;
        cv_dice += rc.dice;
        cv_bde += rc.bde;
        pw_dice += rp.dice;
        pw_bde += rp.bde;
    }
    let k = n as f64;
    let msg = format!(
        "mean dice chanvese={:.4} prewitt={:.4}; mean bde chanvese={:.3} prewitt={:.3}",
        cv_dice / k,
        pw_dice / k,
        cv_bde / k,
        pw_bde / k
    );
    check(cv_dice > pw_dice && cv_bde < pw_bde, msg.clone())?;
    Ok(msg)
}

fn kappa_cross_check() -> Outcome {
    let c = ConfusionCounts::new(21, 0, 3, 15);
    let k = cohen_kappa(&c).ok_or("kappa undefined")?;
    let s = cls_stats(&c);
    let sens = s.sensitivity.ok_or("sensitivity undefined")?;
    let acc = s.accuracy.ok_or("accuracy undefined")?;
    let msg = format!("kappa={k:.4} sensitivity={sens} accuracy={acc:.4}");
    check(
        (k - 0.843).abs() <= 0.001 && sens == 0.875 && (acc - 0.9231).abs() <= 1e-4,
        msg.clone(),
    )?;
    Ok(msg)
}

fn random_box(r: &mut rand_chacha::ChaCha8Rng) -> CenterBox {
    CenterBox::new(
        r.random_range(0.0..640.0),
        r.random_range(0.0..640.0),
        r.random_range(8.0..512.0),
        r.random_range(8.0..512.0),
    )
    .unwrap()
}

fn gating() -> Outcome {
    let mut r = rng(606);
    for i in 0..100 {
        let n = r.random_range(1..40);
        let anchors: Vec<CenterBox> = (0..n).map(|_| random_box(&mut r)).collect();
        let labels: Vec<AnchorLabel> = (0..n)
            .map(|_| {
                if r.random_bool(0.7) {
                    AnchorLabel::Negative
                } else {
                    AnchorLabel::Ignore
                }
            })
            .collect();
        let scores: Vec<f64> = (0..n).map(|_| r.random_range(0.0..=1.0)).collect();
        let t: Vec<[f64; 4]> = (0..n)
            .map(|_| [0.0; 4].map(|_: f64| r.random_range(-3.0..3.0)))
            .collect();
        let base = AnchorBatch::new(anchors, labels, scores, t, vec![None; n]).map_err(|e| e.to_string())?;
        let before = rpn_loss(&base).map_err(|e| e.to_string())?;
        let mut moved = base.clone();
        for ti in &mut moved.t {
            for v in ti.iter_mut() {
                *v += r.random_range(-100.0..100.0);
            }
        }
        let after = rpn_loss(&moved).map_err(|e| e.to_string())?;
        check(
            before.total.to_bits() == after.total.to_bits() && after.reg == 0.0,
            format!("batch {i}: {before:?} vs {after:?}"),
        )?;
    }
    Ok("100 all-background batches, totals bit-identical under t perturbation".into())
}

fn anchor_rules() -> Outcome {
    let gt = CenterBox::new(0.0, 0.0, 100.0, 100.0).unwrap();
    let nested: Vec<CenterBox> = [80.0, 50.0, 20.0]
        .iter()
        .map(|&w| CenterBox::new(0.0, 0.0, w, 100.0).unwrap())
        .collect();
    let got = label_anchors(&nested, &gt);
    let want = [AnchorLabel::Positive, AnchorLabel::Ignore, AnchorLabel::Negative];
    check(got == want, format!("IoU 0.8/0.5/0.2 labeled {got:?}"))?;
    let direct: Vec<AnchorLabel> = [0.8, 0.5, 0.2]
        .iter()
        .map(|&v| AnchorLabel::from_iou(v))
        .collect();
    check(direct == want, format!("from_iou gave {direct:?}"))?;
    let n = default_anchors((320.0, 320.0)).len();
    check(n == 9, format!("{n} default anchors"))?;
    Ok("IoU 0.8/0.5/0.2 -> positive/ignore/negative; 9 default anchors".into())
}

fn roi_pooling() -> Outcome {
    let mut r = rng(808);
    let feature = GrayImage::from_fn(96, 96, |x, y| ((x * 31 + y * 17) % 97) as f64);
    for _ in 0..50 {
        let w = r.random_range(7..=96u32);
        let h = r.random_range(7..=96u32);
        let x = r.random_range(0..=96 - w);
        let y = r.random_range(0..=96 - h);
        let b = BoundingBox::new(x, y, w, h, Frame::Custom(96, 96)).unwrap();
        let out = roi_pool(&feature, &b, 7, 7).map_err(|e| e.to_string())?;
        check(
            out.len() == 7 && out.iter().all(|row| row.len() == 7),
            format!("region {w}x{h} pooled to {}x{}", out.len(), out[0].len()),
        )?;
    }
    let f = GrayImage::from_fn(4, 4, |x, y| (y * 4 + x + 1) as f64);
    let b = BoundingBox::new(0, 0, 4, 4, Frame::Custom(4, 4)).unwrap();
    let got = roi_pool(&f, &b, 2, 2).map_err(|e| e.to_string())?;
    check(
        got == vec![vec![6.0, 8.0], vec![14.0, 16.0]],
        format!("worked example gave {got:?}"),
    )?;
    Ok("50 random regions -> 7x7; 4x4 example = [[6,8],[14,16]]".into())
}

fn auc_equivalence() -> Outcome {
    let start = Instant::now();
    let mut r = rng(909);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.random_range(2..200);
        let mut samples: Vec<ScoredSample> = (0..n)
            .map(|_| ScoredSample {
                score: (r.random_range(0.0..1.0f64) * 20.0).floor() / 20.0,
                label: if r.random_bool(0.4) {
                    ClassLabel::Positive
                } else {
                    ClassLabel::Negative
                },
            })
            .collect();
        samples[0].label = ClassLabel::Positive;
        samples[1].label = ClassLabel::Negative;
        let pos: Vec<f64> = samples
            .iter()
            .filter(|s| s.label == ClassLabel::Positive)
            .map(|s| s.score)
            .collect();
        let neg: Vec<f64> = samples
            .iter()
            .filter(|s| s.label == ClassLabel::Negative)
            .map(|s| s.score)
            .collect();
        let auc = roc_auc(&samples).map_err(|e| e.to_string())?.auc;
        worst = worst.max((auc - oracles::mann_whitney(&pos, &neg)).abs());
    }
    let separated: Vec<ScoredSample> = (0..20)
        .map(|i| ScoredSample {
            score: i as f64 / 20.0,
            label: if i >= 10 {
                ClassLabel::Positive
            } else {
                ClassLabel::Negative
            },
        })
        .collect();
    let perfect = roc_auc(&separated).map_err(|e| e.to_string())?.auc;
    let t = start.elapsed();
    let msg = format!("100 sets, max |auc - U| = {worst:.1e}, separated auc = {perfect}, {t:.2?}");
    check(
        worst <= 1e-12 && perfect == 1.0 && t < Duration::from_secs(2),
        msg.clone(),
    )?;
    Ok(msg)
}

fn write_cases(dir: &Path, n: u64) -> Result<(), String> {
    let mut cases = Vec::new();
    for seed in 0..n {
        let ph = generate(&ordering_phantom(seed)).map_err(|e| e.to_string())?;
        let id = format!("case{seed:02}");
        save_image(&ph.image, dir.join(format!("{id}.pgm"))).map_err(|e| e.to_string())?;
        save_mask(&ph.mask, dir.join(format!("{id}.mask.pgm"))).map_err(|e| e.to_string())?;
        let bbox = serde_json::json!({
            "x": ph.bbox.x, "y": ph.bbox.y, "w": ph.bbox.w, "h": ph.bbox.h,
            "frame": ph.bbox.frame, "confidence": 0.9 + seed as f64 / 1000.0,
        });
        fs::write(dir.join(format!("{id}.bbox.json")), bbox.to_string()).map_err(|e| e.to_string())?;
        cases.push(serde_json::json!({
            "id": id, "image": format!("{id}.pgm"), "bbox": format!("{id}.bbox.json"),
            "truth": format!("{id}.mask.pgm"),
        }));
    }
    let manifest = serde_json::json!({ "methods": ["chanvese", "prewitt"], "cases": cases });
    fs::write(dir.join("manifest.json"), manifest.to_string()).map_err(|e| e.to_string())
}

fn parallel_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let input = tmp.path().join("in");
    fs::create_dir_all(&input).map_err(|e| e.to_string())?;
    write_cases(&input, 20)?;
    let run = |jobs: &str, out: &str| -> Result<(), String> {
        let status = Command::new(env!("CARGO_BIN_EXE_segkit"))
            .args(["batch", "--manifest"])
            .arg(input.join("manifest.json"))
            .args(["--jobs", jobs, "--out"])
            .arg(tmp.path().join(out))
            .output()
            .map_err(|e| e.to_string())?;
        check(
            status.status.success(),
            format!(
                "--jobs {jobs} failed: {}",
                String::from_utf8_lossy(&status.stderr)
            ),
        )
    };
    run("1", "serial")?;
    run("8", "parallel")?;
    let mut names: Vec<String> = fs::read_dir(tmp.path().join("serial"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    check(names.iter().any(|n| n == "report.json"), "no report.json written")?;
    for name in &names {
        let a = fs::read(tmp.path().join("serial").join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(tmp.path().join("parallel").join(name)).map_err(|e| format!("{name}: {e}"))?;
        check(a == b, format!("{name} differs between --jobs 1 and --jobs 8"))?;
    }
    Ok(format!(
        "20 cases x 2 methods, {} output files incl. report.json/report.txt byte-identical",
        names.len()
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("metric oracles (voi, gce, bde)", metric_oracles),
        ("identity reports", identity),
        ("chan-vese disk phantom regression", chanvese_regression),
        ("chan-vese beats prewitt on 20 phantoms", method_ordering),
        ("kappa, sensitivity, accuracy from detector counts", kappa_cross_check),
        ("regression gating", gating),
        ("anchor rules", anchor_rules),
        ("roi pooling size independence", roi_pooling),
        ("auc equals mann-whitney", auc_equivalence),
        ("batch --jobs 8 matches --jobs 1", parallel_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let what = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {what}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
