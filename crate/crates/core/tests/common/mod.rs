#![allow(dead_code)]

pub mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segkit::{BinaryMask, LabelMap};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_mask(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> BinaryMask {
    BinaryMask::from_fn(w, h, |_, _| rng.random_bool(density))
}

/// Blob-like mask: union of a few random axis-aligned rectangles.
pub fn random_blobs(rng: &mut ChaCha8Rng, w: usize, h: usize) -> BinaryMask {
    let rects: Vec<(usize, usize, usize, usize)> = (0..rng.random_range(1..4))
        .map(|_| {
            let x = rng.random_range(0..w - 2);
            let y = rng.random_range(0..h - 2);
            let rw = rng.random_range(2..=(w - x).min(8));
            let rh = rng.random_range(2..=(h - y).min(8));
            (x, y, rw, rh)
        })
        .collect();
    BinaryMask::from_fn(w, h, |x, y| {
        rects
            .iter()
            .any(|&(rx, ry, rw, rh)| x >= rx && x < rx + rw && y >= ry && y < ry + rh)
    })
}

pub fn random_labels(rng: &mut ChaCha8Rng, w: usize, h: usize, k: u32) -> LabelMap {
    LabelMap::new(w, h, (0..w * h).map(|_| rng.random_range(0..k)).collect()).unwrap()
}
