use ndarray::Axis;
use rayon::prelude::*;
use serde::Serialize;
use sketchseg::raster::{load_gray, load_mask, save_gray};
use sketchseg::transport::{extract_patch_features, multi_prompt_transport, pooled_prompt_feature, upsample_scoremap};
use sketchseg::{Features, GrayRaster};

use crate::config::{RunConfig, TransportSettings};
use crate::error::{CliError, CliResult};
use crate::files::{ensure_dir, write_json};

pub const REPORT: &str = "transport.json";

#[derive(Debug, Serialize)]
pub struct TransportReport {
    pub command: &'static str,
    pub seed: u64,
    pub config: TransportSettings,
    pub achieved_cost: f64,
    pub iterations_used: usize,
    pub converged: bool,
    pub row_marginal_error: f64,
    pub col_marginal_error: f64,
    pub heatmaps: Vec<Heatmap>,
}

#[derive(Debug, Serialize)]
pub struct Heatmap {
    pub prompt: String,
    pub file: String,
    /// Range of the aggregated score before min-max scaling to 0..255.
    pub score_min: f64,
    pub score_max: f64,
}

/// Min-max scales a score map to 8 bits; a constant map becomes all zeros.
fn to_gray(values: &[f64], width: usize, height: usize) -> sketchseg::Result<(GrayRaster, f64, f64)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let pixels = values
        .iter()
        .map(|&v| {
            if span > 0.0 {
                ((v - lo) / span * 255.0).round().clamp(0.0, 255.0) as u8
            } else {
                0
            }
        })
        .collect();
    Ok((GrayRaster::new(width, height, pixels)?, lo, hi))
}

pub fn run(cfg: &RunConfig) -> CliResult<TransportReport> {
    let settings = &cfg.transport;
    let image_path = settings
        .image
        .as_deref()
        .ok_or_else(|| CliError::Config("transport needs --image".into()))?;
    if settings.sketches.is_empty() {
        return Err(CliError::Config("transport needs at least one --sketch".into()));
    }
    let sinkhorn_cfg = settings.sinkhorn();
    sinkhorn_cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let out = cfg.out_dir()?;

    let image = load_gray(image_path).map_err(|e| CliError::from_core(image_path, e))?;
    let grid = (settings.grid.rows, settings.grid.cols);
    let features: Features =
        extract_patch_features(&image, grid, settings.dim).map_err(|e| CliError::from_core(image_path, e))?;
    let prompts = settings
        .sketches
        .par_iter()
        .map(|path| {
            let sketch = load_mask(path).map_err(|e| CliError::from_core(path, e))?;
            if (sketch.width(), sketch.height()) != (image.width(), image.height()) {
                return Err(CliError::Config(format!(
                    "{}: sketch is {}x{}, image is {}x{}",
                    path.display(),
                    sketch.width(),
                    sketch.height(),
                    image.width(),
                    image.height()
                )));
            }
            pooled_prompt_feature(&features, &sketch, grid).map_err(|e| CliError::from_core(path, e))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mpt = multi_prompt_transport(&features, &prompts, &sinkhorn_cfg)
        .map_err(|e| CliError::from_core(image_path, e))?;
    if !mpt.plan.converged {
        log::warn!(
            "transport stopped after {} iterations without meeting the tolerance",
            mpt.plan.iterations_used
        );
    }
    let (w, h) = (image.width(), image.height());
    let maps = upsample_scoremap(mpt.aggregated.view(), grid, (h, w)).map_err(|e| CliError::from_core(image_path, e))?;

    ensure_dir(out)?;
    let heatmaps = settings
        .sketches
        .iter()
        .enumerate()
        .map(|(k, prompt)| {
            let values: Vec<f64> = maps.index_axis(Axis(2), k).iter().copied().collect();
            let (gray, score_min, score_max) = to_gray(&values, w, h).map_err(|e| CliError::from_core(prompt, e))?;
            let file = format!("heatmap_p{}.png", k + 1);
            let path = out.join(&file);
            save_gray(&gray, &path).map_err(|e| CliError::from_core(&path, e))?;
            Ok(Heatmap {
                prompt: prompt.display().to_string(),
                file,
                score_min,
                score_max,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;

    let report = TransportReport {
        command: "transport",
        seed: cfg.seed,
        config: settings.clone(),
        achieved_cost: mpt.plan.achieved_cost,
        iterations_used: mpt.plan.iterations_used,
        converged: mpt.plan.converged,
        row_marginal_error: mpt.plan.row_marginal_error,
        col_marginal_error: mpt.plan.col_marginal_error,
        heatmaps,
    };
    write_json(&out.join(REPORT), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_maps_scale_to_zero() {
        let (g, lo, hi) = to_gray(&[0.3; 6], 3, 2).unwrap();
        assert!(g.pixels().iter().all(|&p| p == 0));
        assert_eq!((lo, hi), (0.3, 0.3));
        let (g, ..) = to_gray(&[0.0, 0.5, 1.0], 3, 1).unwrap();
        assert_eq!(g.pixels(), &[0, 128, 255]);
    }
}
