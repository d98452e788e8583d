use ndarray::{concatenate, Array2, Array3, ArrayView2, Axis};

use super::{sinkhorn, CostMatrix, FeatureMatrix, Marginals, ScoreStack, SinkhornConfig, TransportPlan};
use crate::error::{mismatch, Error, Result};
use crate::raster::{BinaryMask, GrayRaster};
use crate::scalar::Scalar;

fn normalized_rows<T: Scalar>(m: ArrayView2<'_, T>) -> Result<Array2<T>> {
    let mut out = m.to_owned();
    for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        let norm = row.iter().map(|&v| v * v).sum::<T>().sqrt();
        if !(norm > T::zero()) {
            return Err(Error::ZeroNormRow(i));
        }
        row.mapv_inplace(|v| v / norm);
    }
    Ok(out)
}

/// Cosine similarity between every row of `a` and every row of `b`
/// (`a.rows × b.rows`), clamped to `[-1, 1]`.
pub fn cosine_scores<T: Scalar>(a: &FeatureMatrix<T>, b: &FeatureMatrix<T>) -> Result<Array2<T>> {
    if a.dim() != b.dim() {
        return Err(mismatch(format!("dim {}", a.dim()), format!("dim {}", b.dim())));
    }
    let na = normalized_rows(a.view())?;
    let nb = normalized_rows(b.view())?;
    Ok(na.dot(&nb.t()).mapv(|v| v.max(-T::one()).min(T::one())))
}

/// `T ⊙ S` reshaped to `HW × K_p × N` and summed over `N`.
pub fn mpt_aggregate<T: Scalar>(plan: &TransportPlan<T>, stack: &ScoreStack<T>) -> Result<Array2<T>> {
    let v = stack.values();
    if plan.values.dim() != v.dim() {
        return Err(mismatch(
            format!("plan {:?}", v.dim()),
            format!("plan {:?}", plan.values.dim()),
        ));
    }
    let (hw, k, n) = (stack.pixels(), stack.num_prompts(), stack.per_prompt_cols());
    let mut out = Array2::zeros((hw, k));
    for p in 0..hw {
        for kk in 0..k {
            let mut acc = T::zero();
            for c in kk * n..(kk + 1) * n {
                acc = acc + plan.values[[p, c]] * v[[p, c]];
            }
            out[[p, kk]] = acc;
        }
    }
    Ok(out)
}

/// Output of [`multi_prompt_transport`].
#[derive(Clone, Debug)]
pub struct MptOutput<T> {
    /// `HW × (K_p · N)` cosine scores.
    pub scores: ScoreStack<T>,
    pub plan: TransportPlan<T>,
    /// `HW × K_p` transport-weighted score map.
    pub aggregated: Array2<T>,
}

/// Scores every image feature row against all prompt token rows, solves the
/// uniform-marginal entropic transport on `C = 1 - S` and aggregates per prompt.
/// All prompts must have the same token count `N`.
pub fn multi_prompt_transport<T: Scalar>(
    image: &FeatureMatrix<T>,
    prompts: &[FeatureMatrix<T>],
    cfg: &SinkhornConfig,
) -> Result<MptOutput<T>> {
    let first = prompts.first().ok_or(Error::EmptyInput)?;
    let n = first.rows();
    if let Some(bad) = prompts.iter().find(|p| p.rows() != n) {
        return Err(mismatch(format!("{n} tokens per prompt"), format!("{} tokens", bad.rows())));
    }
    let views: Vec<_> = prompts.iter().map(|p| p.view()).collect();
    let tokens = FeatureMatrix::new(
        concatenate(Axis(0), &views).map_err(|e| Error::InvalidDimensions(e.to_string()))?,
    )?;
    let s = cosine_scores(image, &tokens)?;
    let cost = CostMatrix::from_scores(&s)?;
    let marg = Marginals::uniform(cost.n(), cost.m())?;
    let plan = sinkhorn(&cost, &marg, cfg)?;
    let scores = ScoreStack::new(s, prompts.len(), n)?;
    let aggregated = mpt_aggregate(&plan, &scores)?;
    Ok(MptOutput {
        scores,
        plan,
        aggregated,
    })
}

#[inline]
fn source_coord(dst: usize, in_len: usize, out_len: usize) -> (usize, usize, f64) {
    let scale = in_len as f64 / out_len as f64;
    let src = ((dst as f64 + 0.5) * scale - 0.5).max(0.0);
    let lo = (src.floor() as usize).min(in_len - 1);
    let hi = (lo + 1).min(in_len - 1);
    (lo, hi, src - lo as f64)
}

/// Bilinear resize of an `H' × W' × K_p` map (given as `H'W' × K_p` rows in
/// row-major pixel order) to `H_i × W_i × K_p`, with half-pixel centers.
pub fn upsample_scoremap<T: Scalar>(
    scores: ArrayView2<'_, T>,
    source: (usize, usize),
    target: (usize, usize),
) -> Result<Array3<T>> {
    let (sh, sw) = source;
    let (th, tw) = target;
    if sh == 0 || sw == 0 || th == 0 || tw == 0 {
        return Err(Error::InvalidDimensions("resize sides must be >= 1".into()));
    }
    if scores.nrows() != sh * sw {
        return Err(mismatch(format!("{} rows", sh * sw), format!("{} rows", scores.nrows())));
    }
    let k = scores.ncols();
    let mut out = Array3::zeros((th, tw, k));
    let xs: Vec<_> = (0..tw).map(|x| source_coord(x, sw, tw)).collect();
    for y in 0..th {
        let (y0, y1, fy) = source_coord(y, sh, th);
        let fy = T::lit(fy);
        for (x, &(x0, x1, fx)) in xs.iter().enumerate() {
            let fx = T::lit(fx);
            for c in 0..k {
                let v00 = scores[[y0 * sw + x0, c]];
                let v01 = scores[[y0 * sw + x1, c]];
                let v10 = scores[[y1 * sw + x0, c]];
                let v11 = scores[[y1 * sw + x1, c]];
                let top = v00 + (v01 - v00) * fx;
                let bottom = v10 + (v11 - v10) * fx;
                out[[y, x, c]] = top + (bottom - top) * fy;
            }
        }
    }
    Ok(out)
}

/// Pixel windows `(y0, y1, x0, x1)` (half-open) of an `h' × w'` grid laid
/// over a `height × width` image with ceiling-sized cells, row-major.
pub fn grid_cells(height: usize, width: usize, grid: (usize, usize)) -> Result<Vec<(usize, usize, usize, usize)>> {
    let (gh, gw) = grid;
    if gh == 0 || gw == 0 {
        return Err(Error::InvalidConfig("grid sides must be >= 1".into()));
    }
    let ch = height.div_ceil(gh);
    let cw = width.div_ceil(gw);
    if (gh - 1) * ch >= height || (gw - 1) * cw >= width {
        return Err(Error::InvalidConfig(format!(
            "grid {gh}x{gw} leaves empty cells on a {height}x{width} image"
        )));
    }
    let mut cells = Vec::with_capacity(gh * gw);
    for i in 0..gh {
        for j in 0..gw {
            cells.push((i * ch, ((i + 1) * ch).min(height), j * cw, ((j + 1) * cw).min(width)));
        }
    }
    Ok(cells)
}

/// Hand-crafted patch descriptors standing in for learned encoder features:
/// per grid cell `[mean, std, center_x / W, center_y / H]` of the raw
/// intensities, truncated or zero-padded to `dim`.
pub fn extract_patch_features<T: Scalar>(img: &GrayRaster, grid: (usize, usize), dim: usize) -> Result<FeatureMatrix<T>> {
    if dim == 0 {
        return Err(Error::InvalidConfig("feature dim must be >= 1".into()));
    }
    let (h, w) = (img.height(), img.width());
    let cells = grid_cells(h, w, grid)?;
    let mut values = Vec::with_capacity(cells.len() * dim);
    for &(y0, y1, x0, x1) in &cells {
        let count = ((y1 - y0) * (x1 - x0)) as f64;
        let (mut sum, mut sq) = (0.0f64, 0.0f64);
        for y in y0..y1 {
            for x in x0..x1 {
                let v = f64::from(img.get(x, y));
                sum += v;
                sq += v * v;
            }
        }
        let mean = sum / count;
        let var = (sq / count - mean * mean).max(0.0);
        let feat = [
            mean,
            var.sqrt(),
            (x0 + x1) as f64 / 2.0 / w as f64,
            (y0 + y1) as f64 / 2.0 / h as f64,
        ];
        values.extend((0..dim).map(|d| T::lit(feat.get(d).copied().unwrap_or(0.0))));
    }
    FeatureMatrix::from_rows(cells.len(), dim, values)
}

/// One prompt token: the mean of the image patch features over the grid
/// cells touched by sketch strokes.
pub fn pooled_prompt_feature<T: Scalar>(
    image_features: &FeatureMatrix<T>,
    sketch: &BinaryMask,
    grid: (usize, usize),
) -> Result<FeatureMatrix<T>> {
    let cells = grid_cells(sketch.height(), sketch.width(), grid)?;
    if cells.len() != image_features.rows() {
        return Err(mismatch(
            format!("{} feature rows", cells.len()),
            format!("{}", image_features.rows()),
        ));
    }
    let feats = image_features.view();
    let mut acc = ndarray::Array1::<T>::zeros(image_features.dim());
    let mut hits = 0usize;
    for (row, &(y0, y1, x0, x1)) in cells.iter().enumerate() {
        let touched = (y0..y1).any(|y| (x0..x1).any(|x| sketch.get(x, y)));
        if touched {
            acc = acc + feats.row(row);
            hits += 1;
        }
    }
    if hits == 0 {
        return Err(Error::EmptySketch);
    }
    let token = acc.mapv(|v| v / T::from_usize_lossy(hits));
    FeatureMatrix::new(token.insert_axis(Axis(0)))
}
