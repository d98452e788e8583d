use std::fs::File;
use std::io::BufReader;

use serde::Serialize;
use sketchseg::metrics::{bin_points, lowess_fit, read_records_csv, LowessConfig, SizeRangeFilter};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::files::{ensure_dir, write_csv, write_json};

pub const SCATTER: &str = "scatter.csv";
pub const CURVE: &str = "lowess.csv";
pub const REPORT: &str = "scale_analysis.json";

#[derive(Debug, Serialize)]
pub struct ScaleReport {
    pub command: &'static str,
    pub input: String,
    pub lowess: LowessConfig,
    pub size_filter: SizeRangeFilter,
    pub records: usize,
    pub kept: usize,
    pub scatter_points: usize,
    pub curve_points: usize,
}

pub fn run(cfg: &RunConfig) -> CliResult<ScaleReport> {
    let settings = &cfg.scale_analysis;
    let input = settings
        .csv
        .as_deref()
        .ok_or_else(|| CliError::Config("scale-analysis needs --csv".into()))?;
    let lowess = settings.lowess();
    lowess.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let out = cfg.out_dir()?;

    let file = File::open(input).map_err(|e| CliError::io(input, e))?;
    let records = read_records_csv(BufReader::new(file)).map_err(|e| CliError::from_core(input, e))?;
    if records.is_empty() {
        return Err(CliError::Empty(format!("{} has no records", input.display())));
    }
    let kept = settings.size_filter.apply(&records);
    if kept.is_empty() {
        return Err(CliError::Empty("the size filter removed every record".into()));
    }
    let points: Vec<(f64, f64)> = kept.iter().map(|r| (r.gt_pixels as f64, r.iou)).collect();
    let scatter = bin_points(&points, &lowess).map_err(|e| CliError::from_core(input, e))?;
    // A single distinct size cannot support a local line; report its mean.
    let curve = if scatter.iter().all(|p| p.0 == scatter[0].0) {
        let mean = scatter.iter().map(|p| p.1).sum::<f64>() / scatter.len() as f64;
        vec![(scatter[0].0, mean)]
    } else {
        lowess_fit(&points, &lowess).map_err(|e| CliError::from_core(input, e))?
    };

    ensure_dir(out)?;
    write_csv(&out.join(SCATTER), &["gt_pixels", "iou"], &scatter)?;
    write_csv(&out.join(CURVE), &["gt_pixels", "fitted_iou"], &curve)?;
    let report = ScaleReport {
        command: "scale-analysis",
        input: input.display().to_string(),
        lowess,
        size_filter: settings.size_filter.clone(),
        records: records.len(),
        kept: kept.len(),
        scatter_points: scatter.len(),
        curve_points: curve.len(),
    };
    write_json(&out.join(REPORT), &report)?;
    Ok(report)
}
