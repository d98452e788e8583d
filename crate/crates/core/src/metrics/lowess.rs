use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowessConfig {
    pub frac: f64,
    pub bin_size: u64,
    pub samples_per_bin: usize,
}

impl Default for LowessConfig {
    fn default() -> Self {
        Self {
            frac: 0.2,
            bin_size: 2000,
            samples_per_bin: 1,
        }
    }
}

impl LowessConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frac > 0.0 && self.frac <= 1.0) {
            return Err(Error::InvalidConfig(format!("frac must be in (0, 1], got {}", self.frac)));
        }
        if self.bin_size == 0 {
            return Err(Error::InvalidConfig("bin_size must be >= 1".into()));
        }
        if self.samples_per_bin == 0 {
            return Err(Error::InvalidConfig("samples_per_bin must be >= 1".into()));
        }
        Ok(())
    }
}

/// Buckets points by `floor(x / bin_size)` and keeps the `samples_per_bin`
/// points closest to each bucket center (earlier input wins ties). The
/// result is sorted by `x`, stable in input order.
pub fn bin_points<T: Scalar>(points: &[(T, T)], cfg: &LowessConfig) -> Result<Vec<(T, T)>> {
    cfg.validate()?;
    if let Some(p) = points.iter().find(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain(format!("non-finite point ({}, {})", p.0, p.1)));
    }
    let width = T::lit(cfg.bin_size as f64);
    let half = T::lit(0.5);
    let mut keyed: Vec<(i64, T, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, &(x, _))| {
            let bin = (x / width).floor();
            let center = (bin + half) * width;
            (bin.to_i64().unwrap_or(i64::MAX), (x - center).abs(), i)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.partial_cmp(&b.1).expect("finite")).then(a.2.cmp(&b.2)));
    let mut kept: Vec<usize> = Vec::new();
    let mut run = 0;
    for (k, entry) in keyed.iter().enumerate() {
        run = if k > 0 && keyed[k - 1].0 == entry.0 { run + 1 } else { 0 };
        if run < cfg.samples_per_bin {
            kept.push(entry.2);
        }
    }
    let mut out: Vec<(usize, (T, T))> = kept.into_iter().map(|i| (i, points[i])).collect();
    out.sort_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).expect("finite").then(a.0.cmp(&b.0)));
    Ok(out.into_iter().map(|(_, p)| p).collect())
}

/// Binned subsampling followed by [`lowess_smooth`].
pub fn lowess_fit<T: Scalar>(points: &[(T, T)], cfg: &LowessConfig) -> Result<Vec<(T, T)>> {
    let binned = bin_points(points, cfg)?;
    lowess_smooth(&binned, cfg.frac)
}

/// Local linear regression with tricube weights at every input `x`.
///
/// Each fit uses the `max(2, ceil(frac * n))` nearest points. The bandwidth
/// is the distance to the farthest of them, so that point gets weight zero.
/// When the weighted design is rank deficient the weighted mean is used.
/// Output is sorted by `x`.
pub fn lowess_smooth<T: Scalar>(points: &[(T, T)], frac: f64) -> Result<Vec<(T, T)>> {
    if !(frac > 0.0 && frac <= 1.0) {
        return Err(Error::InvalidConfig(format!("frac must be in (0, 1], got {frac}")));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain("non-finite point".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite"));
    let n = pts.len();
    let distinct = pts.windows(2).filter(|w| w[0].0 != w[1].0).count() + usize::from(n > 0);
    if distinct < 2 {
        return Err(Error::DegenerateInput(format!(
            "need at least 2 distinct x values, got {distinct}"
        )));
    }
    let k = ((frac * n as f64).ceil() as usize).clamp(2, n);
    let span = pts[n - 1].0 - pts[0].0;
    let mut lo = 0;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let xi = pts[i].0;
        while lo + k < n && xi - pts[lo].0 > pts[lo + k].0 - xi {
            lo += 1;
        }
        let window = &pts[lo..lo + k];
        let h = window
            .iter()
            .map(|&(x, _)| (x - xi).abs())
            .fold(T::zero(), T::max);
        let weights: Vec<T> = window
            .iter()
            .map(|&(x, _)| {
                if h == T::zero() {
                    return T::one();
                }
                let u = (x - xi).abs() / h;
                if u >= T::one() {
                    T::zero()
                } else {
                    let c = T::one() - u * u * u;
                    c * c * c
                }
            })
            .collect();
        out.push((xi, local_linear(window, &weights, xi, span)));
    }
    Ok(out)
}

fn local_linear<T: Scalar>(window: &[(T, T)], weights: &[T], at: T, span: T) -> T {
    let sw: T = weights.iter().copied().sum();
    let xm = window.iter().zip(weights).map(|(&(x, _), &w)| w * x).sum::<T>() / sw;
    let ym = window.iter().zip(weights).map(|(&(_, y), &w)| w * y).sum::<T>() / sw;
    let sxx: T = window
        .iter()
        .zip(weights)
        .map(|(&(x, _), &w)| w * (x - xm) * (x - xm))
        .sum();
    if sxx <= sw * span * span * T::lit(1e-12) {
        return ym;
    }
    let sxy: T = window
        .iter()
        .zip(weights)
        .map(|(&(x, y), &w)| w * (x - xm) * (y - ym))
        .sum();
    ym + sxy / sxx * (at - xm)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_data_stays_constant() {
        let pts: Vec<(f64, f64)> = (0..30).map(|i| (i as f64 * 1.5, 0.7)).collect();
        for (_, y) in lowess_smooth(&pts, 0.2).unwrap() {
            assert!((y - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_line_at_full_span() {
        let pts: Vec<(f64, f64)> = (0..25).map(|i| (i as f64 * 3.0, 2.0 * i as f64 * 3.0 - 4.0)).collect();
        for (x, y) in lowess_smooth(&pts, 1.0).unwrap() {
            assert!((y - (2.0 * x - 4.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn output_sorted_by_x() {
        let pts = vec![(3.0, 1.0), (1.0, 2.0), (2.0, 0.0)];
        let xs: Vec<f64> = lowess_smooth(&pts, 1.0).unwrap().iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn degenerate_input() {
        assert!(matches!(
            lowess_smooth(&[(1.0, 2.0), (1.0, 3.0)], 0.5),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(lowess_smooth::<f64>(&[], 0.5), Err(Error::DegenerateInput(_))));
        assert!(matches!(
            lowess_fit(&[(100.0, 0.5), (900.0, 0.7)], &LowessConfig::default()),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn binning_keeps_points_nearest_center() {
        let cfg = LowessConfig {
            bin_size: 10,
            samples_per_bin: 1,
            ..Default::default()
        };
        let pts = vec![(1.0, 0.1), (4.0, 0.2), (6.0, 0.3), (19.0, 0.4), (12.0, 0.5)];
        assert_eq!(bin_points(&pts, &cfg).unwrap(), vec![(4.0, 0.2), (12.0, 0.5)]);
        let two = LowessConfig {
            samples_per_bin: 2,
            ..cfg.clone()
        };
        assert_eq!(
            bin_points(&pts, &two).unwrap(),
            vec![(4.0, 0.2), (6.0, 0.3), (12.0, 0.5), (19.0, 0.4)]
        );
    }

    #[test]
    fn config_validation() {
        assert!(LowessConfig { frac: 0.0, ..Default::default() }.validate().is_err());
        assert!(LowessConfig { frac: 1.5, ..Default::default() }.validate().is_err());
        assert!(LowessConfig { bin_size: 0, ..Default::default() }.validate().is_err());
        assert!(LowessConfig::default().validate().is_ok());
    }
}
