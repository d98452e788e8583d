use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;

use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;
use sketchseg::metrics::{aggregate, eval_sample, saliency_suite, write_records_csv, EvalRecord, MetricsReport, SaliencyScores};
use sketchseg::raster::{binarize, load_gray, load_mask};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::files::{ensure_dir, list_pngs, write_json, PngEntry};

pub const PER_SAMPLE: &str = "per_sample.csv";
pub const SUMMARY: &str = "summary.json";

#[derive(Debug, Serialize)]
pub struct Summary {
    pub command: &'static str,
    pub samples: usize,
    #[serde(flatten)]
    pub report: MetricsReport,
    /// File names present in only one of the two directories.
    pub unmatched: Vec<String>,
}

/// Predictions are read as soft maps (`pixel / 255`) for the saliency
/// measures and thresholded at 128 for IoU.
fn score_pair(pred: &PngEntry, gt: &PngEntry) -> CliResult<(EvalRecord, SaliencyScores)> {
    let gray = load_gray(&pred.path).map_err(|e| CliError::from_core(&pred.path, e))?;
    let truth = load_mask(&gt.path).map_err(|e| CliError::from_core(&gt.path, e))?;
    let record = eval_sample(&binarize(&gray, 128), &truth, &pred.name).map_err(|e| CliError::from_core(&pred.path, e))?;
    let soft = Array2::from_shape_fn((gray.height(), gray.width()), |(y, x)| f64::from(gray.get(x, y)) / 255.0);
    let scores = saliency_suite(soft.view(), &truth).map_err(|e| CliError::from_core(&pred.path, e))?;
    Ok((record, scores))
}

pub fn run(cfg: &RunConfig) -> CliResult<Summary> {
    let need = |p: &Option<std::path::PathBuf>, flag: &str| {
        p.clone()
            .ok_or_else(|| CliError::Config(format!("eval needs {flag}")))
    };
    let pred_dir = need(&cfg.eval.pred, "--pred")?;
    let gt_dir = need(&cfg.eval.gt, "--gt")?;
    let out = cfg.out_dir()?;

    let preds = list_pngs(&pred_dir)?;
    let mut gts: BTreeMap<String, PngEntry> = list_pngs(&gt_dir)?
        .into_iter()
        .map(|e| (e.name.clone(), e))
        .collect();
    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for p in preds {
        match gts.remove(&p.name) {
            Some(g) => pairs.push((p, g)),
            None => unmatched.push(p.name),
        }
    }
    unmatched.extend(gts.into_keys());
    unmatched.sort();
    for name in &unmatched {
        log::warn!("{name}: no counterpart, skipped");
    }
    if pairs.is_empty() {
        return Err(CliError::Empty("no prediction/ground-truth pairs matched by file name".into()));
    }

    let scored = pairs
        .par_iter()
        .map(|(p, g)| score_pair(p, g))
        .collect::<CliResult<Vec<_>>>()?;
    let records: Vec<EvalRecord> = scored.iter().map(|(r, _)| r.clone()).collect();
    let mut report = aggregate(&records).map_err(|e| CliError::Empty(e.to_string()))?;
    let n = scored.len() as f64;
    let mean = |f: fn(&SaliencyScores) -> f64| Some(scored.iter().map(|(_, s)| f(s)).sum::<f64>() / n);
    report.s_measure = mean(|s| s.s_measure);
    report.e_measure = mean(|s| s.e_measure);
    report.weighted_f = mean(|s| s.weighted_f);
    report.mae = mean(|s| s.mae);

    ensure_dir(out)?;
    let csv_path = out.join(PER_SAMPLE);
    let file = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    write_records_csv(BufWriter::new(file), &records).map_err(|e| CliError::from_core(&csv_path, e))?;
    let summary = Summary {
        command: "eval",
        samples: records.len(),
        report,
        unmatched,
    };
    write_json(&out.join(SUMMARY), &summary)?;
    Ok(summary)
}
