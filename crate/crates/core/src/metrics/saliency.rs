//! Saliency-style evaluation of a soft prediction against a binary mask:
//! structure measure, adaptive enhanced-alignment measure, weighted
//! F-measure and mean absolute error.
//!
//! The prediction is used as given (no min-max rescaling).

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::raster::BinaryMask;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaliencyScores {
    pub s_measure: f64,
    pub e_measure: f64,
    pub weighted_f: f64,
    pub mae: f64,
}

/// Balance between the object- and region-aware structure terms.
pub const STRUCTURE_ALPHA: f64 = 0.5;

fn eps<T: Scalar>() -> T {
    T::lit(f64::EPSILON)
}

fn check<T: Scalar>(pred: &ArrayView2<'_, T>, gt: &BinaryMask) -> Result<()> {
    let (h, w) = pred.dim();
    if (h, w) != (gt.height(), gt.width()) {
        return Err(mismatch(format!("{}x{}", gt.width(), gt.height()), format!("{w}x{h}")));
    }
    if h * w == 0 {
        return Err(Error::EmptyInput);
    }
    if let Some(v) = pred.iter().find(|v| !(**v >= T::zero() && **v <= T::one())) {
        return Err(Error::Domain(format!("prediction {v} outside [0, 1]")));
    }
    Ok(())
}

fn gt_array(gt: &BinaryMask) -> Array2<bool> {
    Array2::from_shape_fn((gt.height(), gt.width()), |(y, x)| gt.get(x, y))
}

pub fn saliency_suite<T: Scalar>(pred: ArrayView2<'_, T>, gt: &BinaryMask) -> Result<SaliencyScores> {
    check(&pred, gt)?;
    let g = gt_array(gt);
    Ok(SaliencyScores {
        s_measure: structure_measure_impl(&pred, &g).to_f64_lossy(),
        e_measure: enhanced_measure_impl(&pred, &g).to_f64_lossy(),
        weighted_f: weighted_f_impl(&pred, &g).to_f64_lossy(),
        mae: mae_impl(&pred, &g).to_f64_lossy(),
    })
}

pub fn mae<T: Scalar>(pred: ArrayView2<'_, T>, gt: &BinaryMask) -> Result<T> {
    check(&pred, gt)?;
    Ok(mae_impl(&pred, &gt_array(gt)))
}

pub fn structure_measure<T: Scalar>(pred: ArrayView2<'_, T>, gt: &BinaryMask) -> Result<T> {
    check(&pred, gt)?;
    Ok(structure_measure_impl(&pred, &gt_array(gt)))
}

pub fn enhanced_measure<T: Scalar>(pred: ArrayView2<'_, T>, gt: &BinaryMask) -> Result<T> {
    check(&pred, gt)?;
    Ok(enhanced_measure_impl(&pred, &gt_array(gt)))
}

pub fn weighted_f_measure<T: Scalar>(pred: ArrayView2<'_, T>, gt: &BinaryMask) -> Result<T> {
    check(&pred, gt)?;
    Ok(weighted_f_impl(&pred, &gt_array(gt)))
}

#[inline]
fn ind<T: Scalar>(b: bool) -> T {
    if b {
        T::one()
    } else {
        T::zero()
    }
}

fn mean<T: Scalar>(values: impl Iterator<Item = T>) -> T {
    let (sum, n) = values.fold((T::zero(), 0usize), |(s, n), v| (s + v, n + 1));
    sum / T::from_usize_lossy(n)
}

fn mae_impl<T: Scalar>(pred: &ArrayView2<'_, T>, gt: &Array2<bool>) -> T {
    mean(pred.iter().zip(gt.iter()).map(|(&p, &g)| (p - ind::<T>(g)).abs()))
}

fn structure_measure_impl<T: Scalar>(pred: &ArrayView2<'_, T>, gt: &Array2<bool>) -> T {
    let fg = gt.iter().filter(|&&g| g).count();
    let y = T::from_usize_lossy(fg) / T::from_usize_lossy(gt.len());
    if fg == 0 {
        return T::one() - mean(pred.iter().copied());
    }
    if fg == gt.len() {
        return mean(pred.iter().copied());
    }
    let alpha = T::lit(STRUCTURE_ALPHA);
    let score = alpha * object_score(pred, gt, y) + (T::one() - alpha) * region_score(pred, gt);
    score.max(T::zero())
}

fn object_score<T: Scalar>(pred: &ArrayView2<'_, T>, gt: &Array2<bool>, u: T) -> T {
    let fg: Vec<T> = pred.iter().zip(gt).filter(|(_, &g)| g).map(|(&p, _)| p).collect();
    let bg: Vec<T> = pred
        .iter()
        .zip(gt)
        .filter(|(_, &g)| !g)
        .map(|(&p, _)| T::one() - p)
        .collect();
    u * s_object(&fg) + (T::one() - u) * s_object(&bg)
}

fn s_object<T: Scalar>(values: &[T]) -> T {
    let n = values.len();
    let x = mean(values.iter().copied());
    let sigma = if n < 2 {
        T::zero()
    } else {
        let ss: T = values.iter().map(|&v| (v - x) * (v - x)).sum();
        (ss / T::from_usize_lossy(n - 1)).sqrt()
    };
    T::lit(2.0) * x / (x * x + T::one() + sigma + eps())
}

/// 1-based split point: rounded (half to even) mean foreground coordinate
/// plus one.
fn centroid(gt: &Array2<bool>) -> (usize, usize) {
    let (mut sx, mut sy, mut n) = (0usize, 0usize, 0usize);
    for ((y, x), &g) in gt.indexed_iter() {
        if g {
            sx += x;
            sy += y;
            n += 1;
        }
    }
    let cx = (sx as f64 / n as f64).round_ties_even() as usize;
    let cy = (sy as f64 / n as f64).round_ties_even() as usize;
    (cx + 1, cy + 1)
}

fn region_score<T: Scalar>(pred: &ArrayView2<'_, T>, gt: &Array2<bool>) -> T {
    let (h, w) = gt.dim();
    let (x, y) = centroid(gt);
    let (x, y) = (x.min(w), y.min(h));
    let area = T::from_usize_lossy(h * w);
    let w1 = T::from_usize_lossy(x * y) / area;
    let w2 = T::from_usize_lossy(y * (w - x)) / area;
    let w3 = T::from_usize_lossy((h - y) * x) / area;
    let w4 = T::one() - w1 - w2 - w3;
    let quads = [
        (0..y, 0..x, w1),
        (0..y, x..w, w2),
        (y..h, 0..x, w3),
        (y..h, x..w, w4),
    ];
    let mut total = T::zero();
    for (rows, cols, weight) in quads {
        let mut p = Vec::new();
        let mut g = Vec::new();
        for r in rows {
            for c in cols.clone() {
                p.push(pred[[r, c]]);
                g.push(ind::<T>(gt[[r, c]]));
            }
        }
        if !p.is_empty() {
            total = total + weight * ssim(&p, &g);
        }
    }
    total
}

fn ssim<T: Scalar>(pred: &[T], gt: &[T]) -> T {
    let n = pred.len();
    let x = mean(pred.iter().copied());
    let y = mean(gt.iter().copied());
    let (mut sx, mut sy, mut sxy) = (T::zero(), T::zero(), T::zero());
    if n > 1 {
        let d = T::from_usize_lossy(n - 1);
        sx = pred.iter().map(|&p| (p - x) * (p - x)).sum::<T>() / d;
        sy = gt.iter().map(|&g| (g - y) * (g - y)).sum::<T>() / d;
        sxy = pred.iter().zip(gt).map(|(&p, &g)| (p - x) * (g - y)).sum::<T>() / d;
    }
    let alpha = T::lit(4.0) * x * y * sxy;
    let beta = (x * x + y * y) * (sx + sy);
    if alpha != T::zero() {
        alpha / (beta + eps())
    } else if beta == T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

fn enhanced_measure_impl<T: Scalar>(pred: &ArrayView2<'_, T>, gt: &Array2<bool>) -> T {
    let size = gt.len();
    let threshold = (T::lit(2.0) * mean(pred.iter().copied())).min(T::one());
    let (mut fg_fg, mut fg_bg) = (0usize, 0usize);
    for (&p, &g) in pred.iter().zip(gt) {
        if p >= threshold {
            if g {
                fg_fg += 1;
            } else {
                fg_bg += 1;
            }
        }
    }
    let gt_fg = gt.iter().filter(|&&g| g).count();
    let pred_fg = fg_fg + fg_bg;
    let pred_bg = size - pred_fg;
    let enhanced_sum = if gt_fg == 0 {
        T::from_usize_lossy(pred_bg)
    } else if gt_fg == size {
        T::from_usize_lossy(pred_fg)
    } else {
        let bg_fg = gt_fg - fg_fg;
        let bg_bg = pred_bg - bg_fg;
        let n = T::from_usize_lossy(size);
        let mean_pred = T::from_usize_lossy(pred_fg) / n;
        let mean_gt = T::from_usize_lossy(gt_fg) / n;
        let (pf, pb) = (T::one() - mean_pred, -mean_pred);
        let (gf, gb) = (T::one() - mean_gt, -mean_gt);
        [(fg_fg, pf, gf), (fg_bg, pf, gb), (bg_fg, pb, gf), (bg_bg, pb, gb)]
            .iter()
            .map(|&(count, a, b)| {
                let align = T::lit(2.0) * (a * b) / (a * a + b * b + eps());
                let enhanced = (align + T::one()) * (align + T::one()) / T::lit(4.0);
                enhanced * T::from_usize_lossy(count)
            })
            .sum()
    };
    enhanced_sum / (T::from_usize_lossy(size - 1) + eps())
}

/// Normalized `size × size` Gaussian with spread `sigma`; tiny tails are
/// zeroed before normalizing.
pub fn gaussian_kernel(size: usize, sigma: f64) -> Array2<f64> {
    let m = (size as f64 - 1.0) / 2.0;
    let mut k = Array2::from_shape_fn((size, size), |(i, j)| {
        let (y, x) = (i as f64 - m, j as f64 - m);
        (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
    });
    let max = k.iter().copied().fold(0.0, f64::max);
    k.mapv_inplace(|v| if v < f64::EPSILON * max { 0.0 } else { v });
    let sum: f64 = k.sum();
    if sum != 0.0 {
        k /= sum;
    }
    k
}

/// Same-size 2-D filtering with zero padding outside the image.
fn filter_zero_padded<T: Scalar>(input: &Array2<T>, kernel: &Array2<f64>) -> Array2<T> {
    let (h, w) = input.dim();
    let (kh, kw) = kernel.dim();
    let (oy, ox) = (kh / 2, kw / 2);
    let src = input.as_standard_layout();
    let src = src.as_slice().expect("standard layout");
    let taps: Vec<T> = kernel.iter().map(|&k| T::lit(k)).collect();
    let mut out = vec![T::zero(); h * w];
    for y in 0..h {
        for (a, krow) in taps.chunks_exact(kw).enumerate() {
            let Some(sy) = (y + a).checked_sub(oy).filter(|&sy| sy < h) else {
                continue;
            };
            let row = &src[sy * w..(sy + 1) * w];
            let dst = &mut out[y * w..(y + 1) * w];
            for (b, &k) in krow.iter().enumerate() {
                // output x reads input x + b - ox
                let (d0, s0) = if b >= ox { (0, b - ox) } else { (ox - b, 0) };
                let len = w.saturating_sub(d0.max(s0));
                for (d, &v) in dst[d0..d0 + len].iter_mut().zip(&row[s0..s0 + len]) {
                    *d = *d + k * v;
                }
            }
        }
    }
    Array2::from_shape_vec((h, w), out).expect("shape matches")
}

/// For every pixel, the `(row, col)` of its nearest foreground pixel in the
/// Euclidean sense, or `None` when there is no foreground.
///
/// Separable lower-envelope construction, first down each column and then
/// along each row. On ties the candidate with the smaller index along the
/// current sweep wins.
pub fn nearest_foreground(fg: &Array2<bool>) -> Array2<Option<(usize, usize)>> {
    let (h, w) = fg.dim();
    let mut rows: Array2<Option<usize>> = Array2::from_elem((h, w), None);
    let mut sites: Vec<usize> = Vec::with_capacity(h.max(w));
    for x in 0..w {
        sites.clear();
        sites.extend((0..h).filter(|&y| fg[[y, x]]));
        if sites.is_empty() {
            continue;
        }
        let mut l = 0;
        for y in 0..h {
            let dist = |s: usize| (s as i64 - y as i64).pow(2);
            while l + 1 < sites.len() && dist(sites[l]) > dist(sites[l + 1]) {
                l += 1;
            }
            rows[[y, x]] = Some(sites[l]);
        }
    }

    let mut out = Array2::from_elem((h, w), None);
    // candidate columns along a row, each with the row of its nearest site
    let mut env: Vec<(i64, i64)> = Vec::with_capacity(w);
    for y in 0..h {
        env.clear();
        let yy = y as i64;
        for x in 0..w {
            let Some(r) = rows[[y, x]] else { continue };
            let (fd, wr) = (x as i64, (r as i64 - yy).pow(2));
            while env.len() >= 2 {
                let (c1, r1) = env[env.len() - 1];
                let (c2, r2) = env[env.len() - 2];
                let a = c1 - c2;
                let b = fd - c1;
                let c = a + b;
                let ur = (r2 - yy).pow(2);
                let vr = (r1 - yy).pow(2);
                if c * vr - b * ur - a * wr - a * b * c <= 0 {
                    break;
                }
                env.pop();
            }
            env.push((fd, r as i64));
        }
        if env.is_empty() {
            continue;
        }
        let dist = |(c, r): (i64, i64), x: i64| (c - x).pow(2) + (r - yy).pow(2);
        let mut l = 0;
        for x in 0..w {
            let xx = x as i64;
            while l + 1 < env.len() && dist(env[l], xx) > dist(env[l + 1], xx) {
                l += 1;
            }
            let (c, r) = env[l];
            out[[y, x]] = Some((r as usize, c as usize));
        }
    }
    out
}

fn weighted_f_impl<T: Scalar>(pred: &ArrayView2<'_, T>, gt: &Array2<bool>) -> T {
    if !gt.iter().any(|&g| g) {
        return T::zero();
    }
    let nearest = nearest_foreground(gt);
    let e = Array2::from_shape_fn(gt.dim(), |(y, x)| (pred[[y, x]] - ind::<T>(gt[[y, x]])).abs());
    let mut et = e.clone();
    let mut dist = Array2::<T>::zeros(gt.dim());
    for ((y, x), near) in nearest.indexed_iter() {
        if gt[[y, x]] {
            continue;
        }
        let (ny, nx) = near.expect("foreground exists");
        et[[y, x]] = e[[ny, nx]];
        let dy = ny as f64 - y as f64;
        let dx = nx as f64 - x as f64;
        dist[[y, x]] = T::lit((dy * dy + dx * dx).sqrt());
    }
    let ea = filter_zero_padded(&et, &gaussian_kernel(7, 5.0));
    let decay = T::lit(0.5f64.ln() / 5.0);
    let two = T::lit(2.0);
    let (mut gt_count, mut ew_fg, mut ew_bg) = (0usize, T::zero(), T::zero());
    for ((idx, &g), (&ev, &eav)) in gt.indexed_iter().zip(e.iter().zip(ea.iter())) {
        let min_e = if g && eav < ev { eav } else { ev };
        if g {
            gt_count += 1;
            ew_fg = ew_fg + min_e;
        } else {
            let b = two - (decay * dist[idx]).exp();
            ew_bg = ew_bg + min_e * b;
        }
    }
    let tpw = T::from_usize_lossy(gt_count) - ew_fg;
    let fpw = ew_bg;
    let recall = T::one() - ew_fg / T::from_usize_lossy(gt_count);
    let precision = tpw / (tpw + fpw + eps());
    two * recall * precision / (recall + precision + eps())
}
