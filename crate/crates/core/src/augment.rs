//! Sketch augmentation by Bézier pivot deformation.
//!
//! binarize → skeletonize → block tiling → per-component cubic fit →
//! pivot perturbation → rasterization, repeated for every variant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bezier::{self, CubicBezier, PerturbParams};
use crate::error::{Error, Result};
use crate::raster::{binarize, BinaryMask, GrayRaster};
use crate::rng;
use crate::skeleton::{connected_components, partition_blocks, skeletonize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AugmentConfig {
    pub binarize_threshold: u8,
    pub block_size: usize,
    pub min_component_pixels: usize,
    pub sample_interval: usize,
    pub render_thickness: usize,
    pub perturb: PerturbParams,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            binarize_threshold: 128,
            block_size: 32,
            min_component_pixels: 10,
            sample_interval: 10,
            render_thickness: 3,
            perturb: PerturbParams::default(),
        }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<()> {
        self.perturb.validate()?;
        if self.block_size < crate::skeleton::MIN_BLOCK_SIZE {
            return Err(Error::InvalidBlockSize(self.block_size));
        }
        for (name, v) in [
            ("min_component_pixels", self.min_component_pixels),
            ("sample_interval", self.sample_interval),
            ("render_thickness", self.render_thickness),
        ] {
            if v == 0 {
                return Err(Error::InvalidConfig(format!("{name} must be >= 1")));
            }
        }
        Ok(())
    }
}

/// Input sketch; grayscale rasters are binarized with the configured threshold.
#[derive(Clone, Copy, Debug)]
pub enum Sketch<'a> {
    Gray(&'a GrayRaster),
    Binary(&'a BinaryMask),
}

impl<'a> From<&'a GrayRaster> for Sketch<'a> {
    fn from(g: &'a GrayRaster) -> Self {
        Sketch::Gray(g)
    }
}

impl<'a> From<&'a BinaryMask> for Sketch<'a> {
    fn from(m: &'a BinaryMask) -> Self {
        Sketch::Binary(m)
    }
}

/// A fitted stroke and its perturbation scale.
#[derive(Clone, Debug, PartialEq)]
pub struct FittedStroke {
    pub block: usize,
    pub curve: CubicBezier<f64>,
    pub theta: f64,
}

/// Skeleton of the binarized sketch plus the fitted strokes of every
/// qualifying component, block by block.
#[derive(Clone, Debug)]
pub struct StrokeModel {
    pub width: usize,
    pub height: usize,
    pub skeleton: BinaryMask,
    pub strokes: Vec<FittedStroke>,
}

/// Binarizes (if needed) and skeletonizes, then fits one cubic per component
/// of at least `min_component_pixels` inside each block.
pub fn fit_strokes(sketch: Sketch<'_>, config: &AugmentConfig) -> Result<StrokeModel> {
    config.validate()?;
    let binary = match sketch {
        Sketch::Gray(g) => binarize(g, config.binarize_threshold),
        Sketch::Binary(m) => m.clone(),
    };
    if binary.is_empty() {
        return Err(Error::EmptySketch);
    }
    let skeleton = skeletonize(&binary);
    let grid = partition_blocks(&skeleton, config.block_size)?;
    let per_block: Vec<Vec<FittedStroke>> = grid
        .blocks
        .par_iter()
        .enumerate()
        .map(|(bi, b)| -> Result<Vec<FittedStroke>> {
            let window = skeleton.crop(b.x, b.y, b.w, b.h)?;
            let mut strokes = Vec::new();
            for comp in connected_components(&window) {
                if comp.len() < config.min_component_pixels {
                    continue;
                }
                let comp = comp.translated(b.x, b.y);
                let points = match bezier::sample_component::<f64>(&comp, config.sample_interval) {
                    Ok(p) => p,
                    Err(Error::DegenerateComponent) => continue,
                    Err(e) => return Err(e),
                };
                let curve = bezier::fit(&points)?;
                let theta = bezier::displacement_magnitude(comp.row_count(), &config.perturb);
                strokes.push(FittedStroke {
                    block: bi,
                    curve,
                    theta,
                });
            }
            Ok(strokes)
        })
        .collect::<Result<_>>()?;
    Ok(StrokeModel {
        width: binary.width(),
        height: binary.height(),
        skeleton,
        strokes: per_block.into_iter().flatten().collect(),
    })
}

/// Renders variant `index` of a stroke model. The noise for block `b` is drawn
/// from the stream keyed by `(seed, b, index)`.
pub fn render_variant(model: &StrokeModel, config: &AugmentConfig, index: usize) -> Result<BinaryMask> {
    let mut canvas = BinaryMask::new(model.width, model.height)?;
    for group in model.strokes.chunk_by(|a, b| a.block == b.block) {
        let mut stream = rng::stream(config.perturb.seed, &[group[0].block as u64, index as u64]);
        for stroke in group {
            let curve = bezier::perturb(&stroke.curve, stroke.theta, &mut stream);
            bezier::render_into(&curve, &mut canvas, config.render_thickness)?;
        }
    }
    Ok(canvas)
}

/// Produces `config.perturb.num_variants` augmented masks of the sketch's size.
pub fn augment_sketch<'a>(sketch: impl Into<Sketch<'a>>, config: &AugmentConfig) -> Result<Vec<BinaryMask>> {
    let model = fit_strokes(sketch.into(), config)?;
    (0..config.perturb.num_variants)
        .into_par_iter()
        .map(|v| render_variant(&model, config, v))
        .collect()
}

/// Intersection over union of two masks; 1 when both are empty.
pub fn variant_distortion(original: &BinaryMask, variant: &BinaryMask) -> Result<f64> {
    let (i, u) = original.overlap_counts(variant)?;
    Ok(if u == 0 { 1.0 } else { i as f64 / u as f64 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(seed: u64, k_step: f64) -> AugmentConfig {
        AugmentConfig {
            perturb: PerturbParams {
                seed,
                k_step,
                num_variants: 3,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    fn stroke_sketch() -> BinaryMask {
        let mut m = BinaryMask::new(64, 64).unwrap();
        let c = CubicBezier::new(
            bezier::Point2::new(4.0, 50.0),
            bezier::Point2::new(20.0, 5.0),
            bezier::Point2::new(40.0, 60.0),
            bezier::Point2::new(60.0, 10.0),
        )
        .unwrap();
        bezier::render_into(&c, &mut m, 3).unwrap();
        m
    }

    #[test]
    fn small_component_contributes_nothing() {
        let mut m = BinaryMask::new(32, 32).unwrap();
        for x in 5..14 {
            m.set(x, 10, true);
        }
        let out = augment_sketch(&m, &config(1, 10.0)).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|v| v.is_empty()));
    }

    #[test]
    fn zero_step_variants_are_identical_refits() {
        let m = stroke_sketch();
        let cfg = config(3, 0.0);
        let out = augment_sketch(&m, &cfg).unwrap();
        let model = fit_strokes((&m).into(), &cfg).unwrap();
        let mut refit = BinaryMask::new(64, 64).unwrap();
        for s in &model.strokes {
            bezier::render_into(&s.curve, &mut refit, cfg.render_thickness).unwrap();
        }
        assert!(!refit.is_empty());
        assert!(out.iter().all(|v| *v == refit));
    }

    #[test]
    fn seeded_runs_are_identical() {
        let m = stroke_sketch();
        let a = augment_sketch(&m, &config(11, 10.0)).unwrap();
        let b = augment_sketch(&m, &config(11, 10.0)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_sketch_is_an_error() {
        let g = GrayRaster::filled(16, 16, 0).unwrap();
        assert!(matches!(
            augment_sketch(&g, &config(0, 10.0)),
            Err(Error::EmptySketch)
        ));
    }

    #[test]
    fn invalid_block_size_propagates() {
        let mut cfg = config(0, 10.0);
        cfg.block_size = 4;
        assert!(matches!(
            augment_sketch(&stroke_sketch(), &cfg),
            Err(Error::InvalidBlockSize(4))
        ));
    }

    #[test]
    fn distortion_cases() {
        let a = BinaryMask::from_ascii(&["##..."]).unwrap();
        let b = BinaryMask::from_ascii(&["####."]).unwrap();
        let c = BinaryMask::from_ascii(&["...##"]).unwrap();
        let e = BinaryMask::new(5, 1).unwrap();
        assert_eq!(variant_distortion(&a, &a).unwrap(), 1.0);
        assert_eq!(variant_distortion(&a, &c).unwrap(), 0.0);
        assert_eq!(variant_distortion(&a, &b).unwrap(), 0.5);
        assert_eq!(variant_distortion(&e, &e).unwrap(), 1.0);
        let other = BinaryMask::new(4, 1).unwrap();
        assert!(matches!(
            variant_distortion(&a, &other),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
