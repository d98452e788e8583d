//! Sketch-masked cross-attention and scale-shift-gate feature fusion.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use rand::Rng;

use crate::error::{mismatch, Error, Result};
use crate::raster::BinaryMask;
use crate::rng;
use crate::scalar::Scalar;
use crate::transport::FeatureMatrix;

/// Additive attention mask over an `H' × W'` key grid: stroke cells are `0`,
/// every other cell is `-inf`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttentionMask {
    height: usize,
    width: usize,
    open: Vec<bool>,
}

impl AttentionMask {
    /// `open[i]` is true where the key is attended (additive value `0`).
    pub fn from_open(height: usize, width: usize, open: Vec<bool>) -> Result<Self> {
        if height == 0 || width == 0 || open.len() != height * width {
            return Err(Error::InvalidDimensions(format!(
                "mask {height}x{width} with {} entries",
                open.len()
            )));
        }
        Ok(Self { height, width, open })
    }

    /// Every key attended.
    pub fn all_open(len: usize) -> Result<Self> {
        Self::from_open(1, len, vec![true; len])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of keys (`H' * W'`).
    pub fn len(&self) -> usize {
        self.open.len()
    }

    pub fn is_empty(&self) -> bool {
        self.open.is_empty()
    }

    pub fn is_open(&self, key: usize) -> bool {
        self.open[key]
    }

    /// Row-major additive values (`0` or `-inf`).
    pub fn additive<T: Scalar>(&self) -> Vec<T> {
        self.open
            .iter()
            .map(|&o| if o { T::zero() } else { T::neg_infinity() })
            .collect()
    }
}

/// Max-pools the sketch onto an `H' × W'` grid (adaptive windows) and marks
/// cells containing any stroke pixel as open.
pub fn build_attention_mask(sketch: &BinaryMask, target: (usize, usize)) -> Result<AttentionMask> {
    let (th, tw) = target;
    if th == 0 || tw == 0 {
        return Err(Error::InvalidDimensions("mask target sides must be >= 1".into()));
    }
    let (h, w) = (sketch.height(), sketch.width());
    let window = |i: usize, out: usize, len: usize| ((i * len) / out, ((i + 1) * len).div_ceil(out));
    let mut open = Vec::with_capacity(th * tw);
    for i in 0..th {
        let (y0, y1) = window(i, th, h);
        for j in 0..tw {
            let (x0, x1) = window(j, tw, w);
            open.push((y0..y1).any(|y| (x0..x1).any(|x| sketch.get(x, y))));
        }
    }
    AttentionMask::from_open(th, tw, open)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttentionConfig {
    pub heads: usize,
    /// Divide logits by `sqrt(head_dim)`. Off by default.
    pub scaled: bool,
}

impl Default for AttentionConfig {
    fn default() -> Self {
        Self {
            heads: 1,
            scaled: false,
        }
    }
}

/// `softmax(M + Q Kᵀ) V` with the default config (one head, no scaling).
pub fn masked_attention<T: Scalar>(
    q: &FeatureMatrix<T>,
    k: &FeatureMatrix<T>,
    v: &FeatureMatrix<T>,
    mask: Option<&AttentionMask>,
) -> Result<FeatureMatrix<T>> {
    masked_attention_with(q, k, v, mask, &AttentionConfig::default())
}

/// Masked multi-head attention. Masked keys get exactly zero weight; a query
/// with every key masked yields a zero row.
pub fn masked_attention_with<T: Scalar>(
    q: &FeatureMatrix<T>,
    k: &FeatureMatrix<T>,
    v: &FeatureMatrix<T>,
    mask: Option<&AttentionMask>,
    cfg: &AttentionConfig,
) -> Result<FeatureMatrix<T>> {
    if q.dim() != k.dim() {
        return Err(mismatch(format!("key dim {}", q.dim()), format!("{}", k.dim())));
    }
    if k.rows() != v.rows() {
        return Err(mismatch(format!("{} value rows", k.rows()), format!("{}", v.rows())));
    }
    if let Some(m) = mask {
        if m.len() != k.rows() {
            return Err(mismatch(format!("mask of {} keys", k.rows()), format!("{}", m.len())));
        }
    }
    let heads = cfg.heads;
    if heads == 0 || q.dim() % heads != 0 || v.dim() % heads != 0 {
        return Err(Error::InvalidConfig(format!(
            "{heads} heads do not divide dims {} / {}",
            q.dim(),
            v.dim()
        )));
    }
    let (dq, dv) = (q.dim() / heads, v.dim() / heads);
    let scale = if cfg.scaled {
        T::one() / T::from_usize_lossy(dq).sqrt()
    } else {
        T::one()
    };
    let open: Vec<usize> = (0..k.rows())
        .filter(|&j| mask.map_or(true, |m| m.is_open(j)))
        .collect();
    let (qv, kv, vv) = (q.view(), k.view(), v.view());
    let mut out = Array2::<T>::zeros((q.rows(), v.dim()));
    if open.is_empty() {
        return FeatureMatrix::new(out);
    }
    let mut logits = vec![T::zero(); open.len()];
    for h in 0..heads {
        let qh = qv.slice(s![.., h * dq..(h + 1) * dq]);
        let kh = kv.slice(s![.., h * dq..(h + 1) * dq]);
        let vh = vv.slice(s![.., h * dv..(h + 1) * dv]);
        for (i, qi) in qh.axis_iter(Axis(0)).enumerate() {
            for (l, &j) in logits.iter_mut().zip(&open) {
                *l = dot(qi, kh.row(j)) * scale;
            }
            let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
            let mut total = T::zero();
            for l in logits.iter_mut() {
                *l = (*l - max).exp();
                total = total + *l;
            }
            let mut row = out.slice_mut(s![i, h * dv..(h + 1) * dv]);
            for (&wgt, &j) in logits.iter().zip(&open) {
                let wgt = wgt / total;
                row.zip_mut_with(&vh.row(j), |o, &x| *o = *o + wgt * x);
            }
        }
    }
    FeatureMatrix::new(out)
}

/// Attention weights of one query row over all keys (zero for masked keys).
pub fn attention_weights<T: Scalar>(
    query: ArrayView1<'_, T>,
    k: &FeatureMatrix<T>,
    mask: Option<&AttentionMask>,
) -> Vec<T> {
    let kv = k.view();
    let logits: Vec<Option<T>> = (0..k.rows())
        .map(|j| mask.map_or(true, |m| m.is_open(j)).then(|| dot(query, kv.row(j))))
        .collect();
    let max = logits.iter().flatten().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return vec![T::zero(); k.rows()];
    }
    let exps: Vec<T> = logits
        .iter()
        .map(|l| l.map_or(T::zero(), |v| (v - max).exp()))
        .collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

#[inline]
fn dot<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

/// Seeded linear maps used by [`fuse`]: query/key/value projections
/// (`dim × dim`) and the pooled-feature regressor (`dim × 3·dim`).
#[derive(Clone, Debug)]
pub struct Projections<T> {
    pub query: Array2<T>,
    pub key: Array2<T>,
    pub value: Array2<T>,
    pub film: Array2<T>,
}

impl<T: Scalar> Projections<T> {
    /// Entries uniform in `[-1/sqrt(dim), 1/sqrt(dim)]`. Q, K, V come from
    /// stream `[0]` of the seed in that order; the regressor from stream `[1]`.
    pub fn from_seed(seed: u64, dim: usize) -> Self {
        let bound = 1.0 / (dim.max(1) as f64).sqrt();
        let fill = |r: &mut rng::Stream, rows: usize, cols: usize| {
            Array2::from_shape_fn((rows, cols), |_| T::lit(r.random_range(-bound..=bound)))
        };
        let mut r = rng::stream(seed, &[0]);
        let query = fill(&mut r, dim, dim);
        let key = fill(&mut r, dim, dim);
        let value = fill(&mut r, dim, dim);
        let film = fill(&mut rng::stream(seed, &[1]), dim, 3 * dim);
        Self {
            query,
            key,
            value,
            film,
        }
    }
}

/// Scale (`gamma`), shift (`beta`) and gate (`alpha`) for [`fuse`]. Vectors
/// have the feature dimension's length, or length 1 to act as a scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct FusionParams<T> {
    pub gamma: Array1<T>,
    pub beta: Array1<T>,
    pub alpha: Array1<T>,
    pub projection_seed: u64,
}

impl<T: Scalar> FusionParams<T> {
    /// `gamma, beta, alpha = Linear(MeanPool(F_S))` using the seeded regressor.
    pub fn derive(f_s: &FeatureMatrix<T>, projection_seed: u64) -> Result<Self> {
        let d = f_s.dim();
        let pooled = f_s
            .view()
            .mean_axis(Axis(0))
            .ok_or(Error::EmptyInput)?;
        let proj = Projections::<T>::from_seed(projection_seed, d);
        let out = pooled.dot(&proj.film);
        Ok(Self {
            gamma: out.slice(s![0..d]).to_owned(),
            beta: out.slice(s![d..2 * d]).to_owned(),
            alpha: out.slice(s![2 * d..3 * d]).to_owned(),
            projection_seed,
        })
    }

    fn check(&self, dim: usize) -> Result<()> {
        for (name, v) in [("gamma", &self.gamma), ("beta", &self.beta), ("alpha", &self.alpha)] {
            if v.len() != dim && v.len() != 1 {
                return Err(mismatch(format!("{name} of length {dim} or 1"), v.len()));
            }
        }
        Ok(())
    }
}

#[inline]
fn channel<T: Scalar>(v: &Array1<T>, c: usize) -> T {
    if v.len() == 1 {
        v[0]
    } else {
        v[c]
    }
}

/// `F_U = F_I + alpha ⊙ (Attention(Q, K, V) ⊙ (1 + gamma) + beta)` with
/// `Q = F_I W_q`, `K = F_S W_k`, `V = F_S W_v`. Channels whose gate is zero
/// are copied from `F_I` unchanged.
pub fn fuse<T: Scalar>(
    f_i: &FeatureMatrix<T>,
    f_s: &FeatureMatrix<T>,
    params: &FusionParams<T>,
    mask: Option<&AttentionMask>,
    cfg: &AttentionConfig,
) -> Result<FeatureMatrix<T>> {
    let d = f_i.dim();
    if f_s.dim() != d {
        return Err(mismatch(format!("sketch dim {d}"), f_s.dim()));
    }
    params.check(d)?;
    let proj = Projections::<T>::from_seed(params.projection_seed, d);
    let q = FeatureMatrix::new(f_i.view().dot(&proj.query))?;
    let k = FeatureMatrix::new(f_s.view().dot(&proj.key))?;
    let v = FeatureMatrix::new(f_s.view().dot(&proj.value))?;
    let attn = masked_attention_with(&q, &k, &v, mask, cfg)?.into_inner();
    let mut out = f_i.view().to_owned();
    for (i, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        for (c, o) in row.iter_mut().enumerate() {
            let a = channel(&params.alpha, c);
            if a == T::zero() {
                continue;
            }
            let g = channel(&params.gamma, c);
            let b = channel(&params.beta, c);
            *o = *o + a * (attn[[i, c]] * (T::one() + g) + b);
        }
    }
    FeatureMatrix::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn fm(v: Array2<f64>) -> FeatureMatrix<f64> {
        FeatureMatrix::new(v).unwrap()
    }

    #[test]
    fn mask_from_sketch() {
        let full = BinaryMask::from_ascii(&["##", "##"]).unwrap();
        assert!(build_attention_mask(&full, (2, 2)).unwrap().additive::<f64>().iter().all(|&v| v == 0.0));
        let empty = BinaryMask::new(4, 4).unwrap();
        let m = build_attention_mask(&empty, (2, 2)).unwrap();
        assert!(m.additive::<f64>().iter().all(|&v| v == f64::NEG_INFINITY));
        let dot = BinaryMask::from_ascii(&["...", ".#.", "..."]).unwrap();
        assert_eq!(build_attention_mask(&dot, (1, 1)).unwrap().additive::<f64>(), vec![0.0]);
        let corner = BinaryMask::from_ascii(&["#...", "....", "....", "...."]).unwrap();
        let m = build_attention_mask(&corner, (2, 2)).unwrap();
        assert_eq!(m.additive::<f64>()[..2], [0.0, f64::NEG_INFINITY]);
    }

    #[test]
    fn one_open_key_returns_its_value() {
        let q = fm(array![[1.0, 2.0], [-3.0, 0.5]]);
        let k = fm(array![[0.1, 0.2], [5.0, 1.0], [-1.0, 2.0]]);
        let v = fm(array![[1.0, 1.0, 1.0], [7.0, 8.0, 9.0], [0.0, 0.0, 0.0]]);
        let mask = AttentionMask::from_open(1, 3, vec![false, true, false]).unwrap();
        let out = masked_attention(&q, &k, &v, Some(&mask)).unwrap();
        for r in out.view().axis_iter(Axis(0)) {
            assert_eq!(r.to_vec(), vec![7.0, 8.0, 9.0]);
        }
    }

    #[test]
    fn fully_masked_rows_are_zero() {
        let q = fm(array![[1e3, -1e3]]);
        let k = fm(array![[1.0, 1.0], [2.0, 2.0]]);
        let v = fm(array![[1.0], [2.0]]);
        let mask = AttentionMask::from_open(1, 2, vec![false, false]).unwrap();
        let out = masked_attention(&q, &k, &v, Some(&mask)).unwrap();
        assert_eq!(out.view()[[0, 0]], 0.0);
    }

    #[test]
    fn heads_must_divide() {
        let q = fm(array![[1.0, 2.0, 3.0]]);
        let cfg = AttentionConfig { heads: 2, scaled: false };
        assert!(matches!(
            masked_attention_with(&q, &q, &q, None, &cfg),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn two_heads_equal_separate_single_heads() {
        let q = fm(array![[0.3, -0.2, 1.0, 0.5], [0.1, 0.9, -0.4, 0.2]]);
        let k = fm(array![[0.5, 0.1, -0.3, 0.8], [-0.6, 0.4, 0.2, 0.2], [0.0, 1.0, 1.0, 0.0]]);
        let v = fm(array![[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]);
        let cfg = AttentionConfig { heads: 2, scaled: true };
        let both = masked_attention_with(&q, &k, &v, None, &cfg).unwrap();
        for h in 0..2 {
            let qh = fm(q.view().slice(s![.., 2 * h..2 * h + 2]).to_owned());
            let kh = fm(k.view().slice(s![.., 2 * h..2 * h + 2]).to_owned());
            let vh = fm(v.view().slice(s![.., h..h + 1]).to_owned());
            let single = masked_attention_with(&qh, &kh, &vh, None, &AttentionConfig { heads: 1, scaled: true }).unwrap();
            for r in 0..2 {
                assert!((both.view()[[r, h]] - single.view()[[r, 0]]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gate_off_is_identity() {
        let f_i = fm(array![[1.0, -0.0, 3.5], [0.25, 2.0, -7.0]]);
        let f_s = fm(array![[0.5, 0.5, 0.1]]);
        let params = FusionParams {
            gamma: array![1.0, 2.0, 3.0],
            beta: array![0.5, 0.5, 0.5],
            alpha: array![0.0, 0.0, 0.0],
            projection_seed: 42,
        };
        let out = fuse(&f_i, &f_s, &params, None, &AttentionConfig::default()).unwrap();
        for (a, b) in out.view().iter().zip(f_i.view().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn single_sketch_row_adds_projected_value() {
        let f_i = fm(array![[1.0, 2.0], [3.0, 4.0], [-1.0, 0.0]]);
        let f_s = fm(array![[0.5, -1.5]]);
        let params = FusionParams {
            gamma: array![0.0],
            beta: array![0.0],
            alpha: array![1.0],
            projection_seed: 5,
        };
        let out = fuse(&f_i, &f_s, &params, None, &AttentionConfig::default()).unwrap();
        let w = Projections::<f64>::from_seed(5, 2).value;
        let v = [
            0.5 * w[[0, 0]] - 1.5 * w[[1, 0]],
            0.5 * w[[0, 1]] - 1.5 * w[[1, 1]],
        ];
        for r in 0..3 {
            for c in 0..2 {
                assert!((out.view()[[r, c]] - (f_i.view()[[r, c]] + v[c])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derived_params_have_feature_length() {
        let f_s = fm(array![[0.5, -1.5, 2.0], [1.0, 0.0, 0.0]]);
        let p = FusionParams::derive(&f_s, 3).unwrap();
        assert_eq!((p.gamma.len(), p.beta.len(), p.alpha.len()), (3, 3, 3));
        assert_eq!(p, FusionParams::derive(&f_s, 3).unwrap());
        let f_i = fm(array![[1.0, 1.0, 1.0]]);
        assert!(fuse(&f_i, &f_s, &p, None, &AttentionConfig::default()).is_ok());
    }

    #[test]
    fn fuse_dimension_errors() {
        let f_i = fm(array![[1.0, 1.0]]);
        let f_s = fm(array![[1.0, 1.0, 1.0]]);
        let p = FusionParams {
            gamma: array![0.0, 0.0],
            beta: array![0.0, 0.0],
            alpha: array![1.0, 1.0],
            projection_seed: 0,
        };
        assert!(fuse(&f_i, &f_s, &p, None, &AttentionConfig::default()).is_err());
        let mask = AttentionMask::all_open(3).unwrap();
        let f_s = fm(array![[1.0, 1.0]]);
        assert!(fuse(&f_i, &f_s, &p, Some(&mask), &AttentionConfig::default()).is_err());
    }
}
