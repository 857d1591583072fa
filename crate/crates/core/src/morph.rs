//! Binary morphology shared by the contour evolution and the edge baseline.

use std::collections::VecDeque;

use crate::image::BinaryMask;

/// Offsets of the two off-center pixels of each 3-pixel line element:
/// horizontal, vertical, main diagonal, anti-diagonal.
const LINES: [[(isize, isize); 2]; 4] = [
    [(-1, 0), (1, 0)],
    [(0, -1), (0, 1)],
    [(-1, -1), (1, 1)],
    [(1, -1), (-1, 1)],
];

#[inline]
fn clamped(m: &BinaryMask, x: isize, y: isize) -> bool {
    let x = x.clamp(0, m.width() as isize - 1) as usize;
    let y = y.clamp(0, m.height() as isize - 1) as usize;
    m.get(x, y)
}

/// Sup-inf: a pixel survives if it lies on some fully-set line element.
pub(crate) fn sup_inf(m: &BinaryMask) -> BinaryMask {
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        if !m.get(x, y) {
            return false;
        }
        let (x, y) = (x as isize, y as isize);
        LINES
            .iter()
            .any(|line| line.iter().all(|&(dx, dy)| clamped(m, x + dx, y + dy)))
    })
}

/// Inf-sup: a pixel is set if every line element through it touches the set.
pub(crate) fn inf_sup(m: &BinaryMask) -> BinaryMask {
    BinaryMask::from_fn(m.width(), m.height(), |x, y| {
        if m.get(x, y) {
            return true;
        }
        let (x, y) = (x as isize, y as isize);
        LINES
            .iter()
            .all(|line| line.iter().any(|&(dx, dy)| clamped(m, x + dx, y + dy)))
    })
}

/// Pixels where the 3×3 dilation and erosion disagree: the one-pixel band on
/// both sides of the set boundary.
pub(crate) fn gradient_band(m: &BinaryMask) -> Vec<bool> {
    let (w, h) = m.dims();
    let mut band = vec![false; w * h];
    for y in 0..h {
        for x in 0..w {
            let mut any = false;
            let mut all = true;
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let v = clamped(m, x as isize + dx, y as isize + dy);
                    any |= v;
                    all &= v;
                }
            }
            band[y * w + x] = any && !all;
        }
    }
    band
}

fn disk_offsets(radius: usize) -> Vec<(isize, isize)> {
    let r = radius as isize;
    let mut out = Vec::new();
    for dy in -r..=r {
        for dx in -r..=r {
            if dx * dx + dy * dy <= r * r {
                out.push((dx, dy));
            }
        }
    }
    out
}

/// Dilation then erosion with a disk; pixels outside the frame are ignored.
pub(crate) fn close_disk(m: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return m.clone();
    }
    let se = disk_offsets(radius);
    let (w, h) = m.dims();
    let inside = |x: isize, y: isize| x >= 0 && y >= 0 && x < w as isize && y < h as isize;
    let dilated = BinaryMask::from_fn(w, h, |x, y| {
        se.iter().any(|&(dx, dy)| {
            let (sx, sy) = (x as isize + dx, y as isize + dy);
            inside(sx, sy) && m.get(sx as usize, sy as usize)
        })
    });
    BinaryMask::from_fn(w, h, |x, y| {
        se.iter().all(|&(dx, dy)| {
            let (sx, sy) = (x as isize + dx, y as isize + dy);
            !inside(sx, sy) || dilated.get(sx as usize, sy as usize)
        })
    })
}

const N4: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// 4-connected flood over pixels whose value equals `value`, from `seeds`.
fn flood(m: &BinaryMask, value: bool, seeds: impl IntoIterator<Item = (usize, usize)>) -> Vec<bool> {
    let (w, h) = m.dims();
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    for (x, y) in seeds {
        if m.get(x, y) == value && !seen[y * w + x] {
            seen[y * w + x] = true;
            queue.push_back((x, y));
        }
    }
    while let Some((x, y)) = queue.pop_front() {
        for (dx, dy) in N4 {
            let (nx, ny) = (x as isize + dx, y as isize + dy);
            if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                continue;
            }
            let (nx, ny) = (nx as usize, ny as usize);
            let i = ny * w + nx;
            if !seen[i] && m.get(nx, ny) == value {
                seen[i] = true;
                queue.push_back((nx, ny));
            }
        }
    }
    seen
}

/// Sets every background pixel not 4-connected to the frame border.
pub(crate) fn fill_holes(m: &BinaryMask) -> BinaryMask {
    let (w, h) = m.dims();
    let border = (0..w)
        .flat_map(|x| [(x, 0), (x, h - 1)])
        .chain((0..h).flat_map(|y| [(0, y), (w - 1, y)]));
    let outside = flood(m, false, border);
    BinaryMask::from_fn(w, h, |x, y| !outside[y * w + x])
}

/// 4-connected foreground components in scan order of their first pixel.
pub(crate) fn components(m: &BinaryMask) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = m.dims();
    let mut label = vec![false; w * h];
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if m.get(x, y) && !label[y * w + x] {
                let reached = flood(m, true, [(x, y)]);
                let mut comp = Vec::new();
                for (i, &r) in reached.iter().enumerate() {
                    if r {
                        label[i] = true;
                        comp.push((i % w, i / w));
                    }
                }
                out.push(comp);
            }
        }
    }
    out
}

/// The largest 4-connected component, preferring the one nearest `anchor` on ties.
pub(crate) fn largest_component(m: &BinaryMask, anchor: (f64, f64)) -> BinaryMask {
    let comps = components(m);
    let dist = |c: &Vec<(usize, usize)>| {
        c.iter()
            .map(|&(x, y)| (x as f64 - anchor.0).powi(2) + (y as f64 - anchor.1).powi(2))
            .fold(f64::INFINITY, f64::min)
    };
    let best = comps
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| dist(b).total_cmp(&dist(a))));
    let mut out = BinaryMask::zeros(m.width(), m.height());
    if let Some(c) = best {
        for &(x, y) in c {
            out.set(x, y, true);
        }
    }
    out
}
