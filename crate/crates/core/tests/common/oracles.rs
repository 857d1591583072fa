//! Brute-force reference computations, written independently of the
//! library's counting and distance-transform routes.

use segkit::{BinaryMask, GrayImage, LabelMap};

fn entropy_bits(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum()
}

/// `H(A) + H(B) - 2·MI(A, B)` from direct entropy sums.
pub fn voi(a: &LabelMap, b: &LabelMap) -> f64 {
    let la = a.labels();
    let lb = b.labels();
    let n = la.len() as f64;
    let ka = *la.iter().max().unwrap() as usize + 1;
    let kb = *lb.iter().max().unwrap() as usize + 1;
    let mut joint = vec![vec![0usize; kb]; ka];
    for (&x, &y) in la.iter().zip(lb) {
        joint[x as usize][y as usize] += 1;
    }
    let pa: Vec<usize> = joint.iter().map(|r| r.iter().sum()).collect();
    let pb: Vec<usize> = (0..kb).map(|j| joint.iter().map(|r| r[j]).sum()).collect();
    let ha = entropy_bits(pa.iter().copied(), n);
    let hb = entropy_bits(pb.iter().copied(), n);
    let mut mi = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            if joint[i][j] > 0 {
                let pij = joint[i][j] as f64 / n;
                mi += pij * (pij / ((pa[i] as f64 / n) * (pb[j] as f64 / n))).log2();
            }
        }
    }
    ha + hb - 2.0 * mi
}

/// Per-pixel set differences of the label regions, exactly as written.
pub fn gce(a: &LabelMap, b: &LabelMap) -> f64 {
    let la = a.labels();
    let lb = b.labels();
    let n = la.len();
    let local = |s1: &[u32], s2: &[u32], p: usize| -> f64 {
        let r1: Vec<usize> = (0..n).filter(|&q| s1[q] == s1[p]).collect();
        let outside = r1.iter().filter(|&&q| s2[q] != s2[p]).count();
        outside as f64 / r1.len() as f64
    };
    let e12: f64 = (0..n).map(|p| local(la, lb, p)).sum();
    let e21: f64 = (0..n).map(|p| local(lb, la, p)).sum();
    e12.min(e21) / n as f64
}

/// Foreground pixels with a 4-neighbour that is background or off-frame.
pub fn boundary_pixels(m: &BinaryMask) -> Vec<(usize, usize)> {
    let (w, h) = m.dims();
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !m.get(x, y) {
                continue;
            }
            let edge = x == 0
                || y == 0
                || x == w - 1
                || y == h - 1
                || !m.get(x - 1, y)
                || !m.get(x + 1, y)
                || !m.get(x, y - 1)
                || !m.get(x, y + 1);
            if edge {
                out.push((x, y));
            }
        }
    }
    out
}

/// Exhaustive nearest-boundary distances, symmetrized. `None` if either
/// boundary is empty.
pub fn bde(a: &BinaryMask, b: &BinaryMask) -> Option<f64> {
    let ba = boundary_pixels(a);
    let bb = boundary_pixels(b);
    if ba.is_empty() || bb.is_empty() {
        return None;
    }
    let directed = |from: &[(usize, usize)], to: &[(usize, usize)]| -> f64 {
        from.iter()
            .map(|&(x, y)| {
                to.iter()
                    .map(|&(u, v)| {
                        let dx = x as f64 - u as f64;
                        let dy = y as f64 - v as f64;
                        (dx * dx + dy * dy).sqrt()
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .sum::<f64>()
            / from.len() as f64
    };
    Some((directed(&ba, &bb) + directed(&bb, &ba)) / 2.0)
}

/// Fraction of (positive, negative) pairs ordered correctly, ties ½.
pub fn mann_whitney(pos: &[f64], neg: &[f64]) -> f64 {
    let mut s = 0.0;
    for &p in pos {
        for &q in neg {
            if p > q {
                s += 1.0;
            } else if p == q {
                s += 0.5;
            }
        }
    }
    s / (pos.len() * neg.len()) as f64
}

/// Otsu by scanning all 255 splits and recomputing class statistics from the
/// pixels each time. Variance is compared as the exact rational
/// `(n1·S0 − n0·S1)² / (n0·n1)` with `S` sums of 8-bit levels; ties keep the
/// lowest split. Returns the threshold between the split bins.
pub fn otsu(img: &GrayImage) -> f64 {
    let levels: Vec<u64> = img
        .data()
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u64)
        .collect();
    let mut best: Option<(u64, u128, u128)> = None;
    for k in 0..255u64 {
        let (mut n0, mut s0, mut n1, mut s1) = (0u128, 0u128, 0u128, 0u128);
        for &l in &levels {
            if l <= k {
                n0 += 1;
                s0 += l as u128;
            } else {
                n1 += 1;
                s1 += l as u128;
            }
        }
        if n0 == 0 || n1 == 0 {
            continue;
        }
        let d = (n1 * s0).abs_diff(n0 * s1);
        let num = d * d;
        let den = n0 * n1;
        if num == 0 {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, bn, bd)) => num * bd > bn * den,
        };
        if better {
            best = Some((k, num, den));
        }
    }
    best.map_or(0.0, |(k, _, _)| (k as f64 + 0.5) / 255.0)
}
