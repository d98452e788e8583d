#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::Rng;
use sketchseg::bezier::{render_into, CubicBezier, Point2};
use sketchseg::raster::{save_gray, save_mask};
use sketchseg::{rng, BinaryMask, GrayRaster};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sketchseg"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("failed to spawn the binary")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by signal")
}

pub fn arg(p: &Path) -> &str {
    p.to_str().expect("non-UTF-8 temp path")
}

/// A few thick random strokes within `half` of `(cx, cy)`.
pub fn strokes(mask: &mut BinaryMask, seed: u64, (cx, cy): (f64, f64), half: f64) {
    let mut r = rng::stream(seed, &[0]);
    for _ in 0..r.random_range(1..4) {
        let mut pt = || Point2::new(cx + r.random_range(-half..half), cy + r.random_range(-half..half));
        let c = CubicBezier::new(pt(), pt(), pt(), pt()).unwrap();
        render_into(&c, mask, 3).unwrap();
    }
}

pub fn disc(size: usize, cx: f64, cy: f64, r: f64) -> BinaryMask {
    let mut m = BinaryMask::new(size, size).unwrap();
    for y in 0..size {
        for x in 0..size {
            if (x as f64 - cx).hypot(y as f64 - cy) <= r {
                m.set(x, y, true);
            }
        }
    }
    m
}

/// Writes `count` (sketch, prediction, ground truth) triplets of side `size`
/// into `sketch/`, `pred/` and `gt/` under `root`, named `s000.png`, ...
/// Ground truths are discs of varying radius; predictions are shifted discs
/// and sketches are scribbles inside the ground truth.
pub fn write_triplets(root: &Path, count: usize, size: usize) -> (PathBuf, PathBuf, PathBuf) {
    let dirs = ["sketch", "pred", "gt"].map(|d| root.join(d));
    for d in &dirs {
        fs::create_dir_all(d).unwrap();
    }
    for i in 0..count {
        let mut r = rng::stream(2024, &[i as u64]);
        let s = size as f64;
        let radius = r.random_range(0.08 * s..0.4 * s);
        let (cx, cy) = (s / 2.0 + r.random_range(-0.05 * s..0.05 * s), s / 2.0);
        let gt = disc(size, cx, cy, radius);
        let shift = r.random_range(0.0..0.5) * radius;
        let pred = disc(size, cx + shift, cy, radius * r.random_range(0.8..1.2));
        let mut sketch = BinaryMask::new(size, size).unwrap();
        let half = radius / 1.6;
        strokes(&mut sketch, i as u64, (cx, cy), half);
        let name = format!("s{i:03}.png");
        save_mask(&sketch, dirs[0].join(&name)).unwrap();
        save_mask(&pred, dirs[1].join(&name)).unwrap();
        save_mask(&gt, dirs[2].join(&name)).unwrap();
    }
    let [a, b, c] = dirs;
    (a, b, c)
}

pub fn gray_png(path: &Path, size: usize, f: impl Fn(usize, usize) -> u8) {
    let pixels = (0..size * size).map(|i| f(i % size, i / size)).collect();
    save_gray(&GrayRaster::new(size, size, pixels).unwrap(), path).unwrap();
}

/// Every file under `dir` (recursively) keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    out
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}
