//! Focal loss for score maps supervised by a binary mask.

use ndarray::{ArrayView2, ArrayView3, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{mismatch, Error, Result};
use crate::raster::BinaryMask;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FocalConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub clamp_eps: f64,
}

impl Default for FocalConfig {
    fn default() -> Self {
        Self {
            alpha: 0.25,
            gamma: 2.0,
            clamp_eps: 1e-7,
        }
    }
}

impl FocalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!("alpha must be in [0, 1], got {}", self.alpha)));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidConfig(format!("gamma must be >= 0, got {}", self.gamma)));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "clamp_eps must be in (0, 0.5), got {}",
                self.clamp_eps
            )));
        }
        Ok(())
    }
}

/// Loss contribution of one pixel with prediction `y` and target `t`.
pub fn focal_term<T: Scalar>(y: T, t: bool, cfg: &FocalConfig) -> T {
    let eps = T::lit(cfg.clamp_eps);
    let y = y.max(eps).min(T::one() - eps);
    let alpha = T::lit(cfg.alpha);
    let (ce, p_t, alpha_t) = if t {
        (-y.ln(), y, alpha)
    } else {
        (-(T::one() - y).ln(), T::one() - y, T::one() - alpha)
    };
    alpha_t * ce * (T::one() - p_t).powf(T::lit(cfg.gamma))
}

/// Mean focal loss over all pixels of an `H × W` prediction.
pub fn focal_loss<T: Scalar>(pred: ArrayView2<'_, T>, target: &BinaryMask, cfg: &FocalConfig) -> Result<T> {
    cfg.validate()?;
    let (h, w) = pred.dim();
    if (h, w) != (target.height(), target.width()) {
        return Err(mismatch(
            format!("{}x{}", target.width(), target.height()),
            format!("{w}x{h}"),
        ));
    }
    if h * w == 0 {
        return Err(Error::EmptyInput);
    }
    let mut total = T::zero();
    for ((y, x), &v) in pred.indexed_iter() {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::Domain(format!("prediction {v} at ({x}, {y}) outside [0, 1]")));
        }
        total = total + focal_term(v, target.get(x, y), cfg);
    }
    Ok(total / T::from_usize_lossy(h * w))
}

/// `K × H × W` score maps each supervised by the same mask; the channel
/// losses are averaged.
pub fn focal_loss_multichannel<T: Scalar>(
    pred: ArrayView3<'_, T>,
    target: &BinaryMask,
    cfg: &FocalConfig,
) -> Result<T> {
    let k = pred.len_of(Axis(0));
    if k == 0 {
        return Err(Error::EmptyInput);
    }
    let mut total = T::zero();
    for channel in pred.axis_iter(Axis(0)) {
        total = total + focal_loss(channel, target, cfg)?;
    }
    Ok(total / T::from_usize_lossy(k))
}

/// Mean of per-sample losses.
pub fn focal_loss_batch<T: Scalar>(
    samples: &[(ArrayView2<'_, T>, &BinaryMask)],
    cfg: &FocalConfig,
) -> Result<T> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = T::zero();
    for (pred, target) in samples {
        total = total + focal_loss(pred.view(), target, cfg)?;
    }
    Ok(total / T::from_usize_lossy(samples.len()))
}
