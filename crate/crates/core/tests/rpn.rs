use proptest::prelude::*;
use segkit::rpn::*;
use segkit::{BoundingBox, Frame, GrayImage};

fn any_box() -> impl Strategy<Value = CenterBox> {
    (-50.0f64..50.0, -50.0f64..50.0, 0.5f64..40.0, 0.5f64..40.0)
        .prop_map(|(cx, cy, w, h)| CenterBox::new(cx, cy, w, h).unwrap())
}

fn any_batch() -> impl Strategy<Value = AnchorBatch> {
    proptest::collection::vec(
        (
            any_box(),
            0u8..3,
            0.0f64..=1.0,
            proptest::array::uniform4(-3.0f64..3.0),
            proptest::array::uniform4(-3.0f64..3.0),
        ),
        1..12,
    )
    .prop_map(|rows| {
        let mut anchors = vec![];
        let mut labels = vec![];
        let mut scores = vec![];
        let mut t = vec![];
        let mut t_star = vec![];
        for (a, l, p, ti, ts) in rows {
            anchors.push(a);
            let label = [AnchorLabel::Positive, AnchorLabel::Negative, AnchorLabel::Ignore][l as usize];
            labels.push(label);
            scores.push(p);
            t.push(ti);
            t_star.push((label == AnchorLabel::Positive).then_some(ts));
        }
        AnchorBatch::new(anchors, labels, scores, t, t_star).unwrap()
    })
}

proptest! {
    #[test]
    fn iou_symmetric_and_bounded(a in any_box(), b in any_box()) {
        let x = iou(&a, &b);
        prop_assert_eq!(x, iou(&b, &a));
        prop_assert!((0.0..=1.0).contains(&x));
        prop_assert_eq!(iou(&a, &a), 1.0);
    }

    #[test]
    fn labels_invariant_under_scaling(gt in any_box(), s in 0.1f64..10.0) {
        let anchors = default_anchors((gt.cx + 3.0, gt.cy - 2.0))
            .into_iter()
            .map(|a| CenterBox::new(a.cx / 8.0, a.cy / 8.0, a.w / 8.0, a.h / 8.0).unwrap())
            .collect::<Vec<_>>();
        let scale = |b: &CenterBox| CenterBox::new(b.cx * s, b.cy * s, b.w * s, b.h * s).unwrap();
        let scaled: Vec<CenterBox> = anchors.iter().map(scale).collect();
        let l1 = label_anchors(&anchors, &gt);
        let l2 = label_anchors(&scaled, &scale(&gt));
        // labels only differ where the IoU sits within rounding of a threshold
        for (i, (a, b)) in l1.iter().zip(&l2).enumerate() {
            if a != b {
                let v = iou(&anchors[i], &gt);
                prop_assert!((v - POSITIVE_IOU).abs() < 1e-9 || (v - NEGATIVE_IOU).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn decode_inverts_parameterize(a in any_box(), t in any_box()) {
        let back = decode(&a, &parameterize(&a, &t));
        for (x, y) in [(back.cx, t.cx), (back.cy, t.cy), (back.w, t.w), (back.h, t.h)] {
            prop_assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn loss_non_negative(b in any_batch()) {
        let l = rpn_loss(&b).unwrap();
        prop_assert!(l.total >= 0.0 && l.cls >= 0.0 && l.reg >= 0.0);
    }

    #[test]
    fn cls_zero_iff_scores_match(b in any_batch()) {
        let mut perfect = b.clone();
        for (s, l) in perfect.scores.iter_mut().zip(&perfect.labels) {
            if let Some(target) = l.target() {
                *s = target;
            }
        }
        let l = rpn_loss(&perfect).unwrap();
        prop_assert!(l.cls < 1e-11);
        let any_off = b.labels.iter().zip(&b.scores).any(|(l, s)| l.target().is_some_and(|t| (t - s).abs() > 1e-6));
        if any_off {
            prop_assert!(rpn_loss(&b).unwrap().cls > 0.0);
        }
    }

    #[test]
    fn negatives_ignore_regression(b in any_batch(), dt in proptest::array::uniform4(-5.0f64..5.0)) {
        let mut neg = b.clone();
        for (l, ts) in neg.labels.iter_mut().zip(neg.t_star.iter_mut()) {
            *l = AnchorLabel::Negative;
            *ts = None;
        }
        let base = rpn_loss(&neg).unwrap();
        let mut moved = neg.clone();
        for t in moved.t.iter_mut() {
            for k in 0..4 {
                t[k] += dt[k];
            }
        }
        let after = rpn_loss(&moved).unwrap();
        prop_assert_eq!(base.total.to_bits(), after.total.to_bits());
        prop_assert_eq!(after.reg, 0.0);
    }

    #[test]
    fn roi_pool_shape_and_bounds(w in 7u32..40, h in 7u32..40, seed in any::<u64>()) {
        let feature = GrayImage::from_fn(40, 40, |x, y| ((x as u64 * 2654435761 + y as u64 * 40503 + seed) % 1000) as f64);
        let region = BoundingBox::new(0, 0, w, h, Frame::Custom(40, 40)).unwrap();
        let out = roi_pool(&feature, &region, 7, 7).unwrap();
        prop_assert_eq!(out.len(), 7);
        prop_assert!(out.iter().all(|r| r.len() == 7));
        let region_max = (0..h as usize)
            .flat_map(|y| (0..w as usize).map(move |x| (x, y)))
            .map(|(x, y)| feature.get(x, y))
            .fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(out.iter().flatten().all(|&v| v <= region_max));
        prop_assert_eq!(out.iter().flatten().cloned().fold(f64::NEG_INFINITY, f64::max), region_max);
    }
}
