use rayon::prelude::*;
use serde::Serialize;
use sketchseg::augment::{fit_strokes, render_variant, variant_distortion, AugmentConfig, Sketch};
use sketchseg::raster::{binarize, load_gray, save_mask};
use sketchseg::rng::{derive_seed, name_key};
use sketchseg::Error;

use crate::config::{AugmentSettings, RunConfig};
use crate::error::{CliError, CliResult};
use crate::files::{ensure_dir, list_pngs, write_json, PngEntry};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: &'static str,
    pub input: String,
    pub seed: u64,
    pub config: AugmentSettings,
    pub files: Vec<FileEntry>,
}

#[derive(Debug, Serialize)]
pub struct FileEntry {
    pub input: String,
    /// Stream seed derived from the run seed and the file name.
    pub seed: u64,
    pub status: &'static str,
    pub variants: Vec<VariantEntry>,
}

#[derive(Debug, Serialize)]
pub struct VariantEntry {
    pub file: String,
    pub distortion_iou: f64,
}

fn process(entry: &PngEntry, cfg: &RunConfig, out: &std::path::Path) -> CliResult<FileEntry> {
    let seed = derive_seed(cfg.seed, &[name_key(&entry.name)]);
    let core: AugmentConfig = cfg.augment.to_core(seed);
    let gray = load_gray(&entry.path).map_err(|e| CliError::from_core(&entry.path, e))?;
    let model = match fit_strokes(Sketch::Gray(&gray), &core) {
        Ok(m) => m,
        Err(Error::EmptySketch) => {
            log::warn!("{}: no strokes, skipped", entry.name);
            return Ok(FileEntry {
                input: entry.name.clone(),
                seed,
                status: "empty_sketch",
                variants: Vec::new(),
            });
        }
        Err(e) => return Err(CliError::from_core(&entry.path, e)),
    };
    let original = binarize(&gray, core.binarize_threshold);
    let mut variants = Vec::with_capacity(core.perturb.num_variants);
    for index in 0..core.perturb.num_variants {
        let mask = render_variant(&model, &core, index).map_err(|e| CliError::from_core(&entry.path, e))?;
        let file = format!("{}_v{}.png", entry.stem(), index + 1);
        let path = out.join(&file);
        save_mask(&mask, &path).map_err(|e| CliError::from_core(&path, e))?;
        let distortion_iou = variant_distortion(&original, &mask).map_err(|e| CliError::from_core(&entry.path, e))?;
        variants.push(VariantEntry { file, distortion_iou });
    }
    Ok(FileEntry {
        input: entry.name.clone(),
        seed,
        status: "ok",
        variants,
    })
}

pub fn run(cfg: &RunConfig) -> CliResult<Manifest> {
    let input = cfg
        .augment
        .input
        .as_deref()
        .ok_or_else(|| CliError::Config("augment needs an input directory (--input)".into()))?;
    cfg.augment
        .to_core(cfg.seed)
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let out = cfg.out_dir()?;
    let entries = list_pngs(input)?;
    if entries.is_empty() {
        return Err(CliError::Empty(format!("no PNG files in {}", input.display())));
    }
    ensure_dir(out)?;
    let files = entries
        .par_iter()
        .map(|e| process(e, cfg, out))
        .collect::<CliResult<Vec<_>>>()?;
    let manifest = Manifest {
        command: "augment",
        input: input.display().to_string(),
        seed: cfg.seed,
        config: cfg.augment.clone(),
        files,
    };
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(manifest)
}
