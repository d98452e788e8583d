use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::BinaryMask;

/// Thresholds reported as `P@X`.
pub const PRECISION_THRESHOLDS: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// Per-sample overlap counts. Field order matches the per-sample CSV columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub sample_id: String,
    pub intersection: u64,
    pub union: u64,
    pub iou: f64,
    pub gt_pixels: u64,
}

impl EvalRecord {
    /// Builds a record from counts; `iou` is 1 for an empty union.
    pub fn from_counts(sample_id: impl Into<String>, intersection: u64, union: u64, gt_pixels: u64) -> Result<Self> {
        if intersection > union || gt_pixels > union {
            return Err(Error::Domain(format!(
                "inconsistent counts I={intersection} U={union} gt={gt_pixels}"
            )));
        }
        let iou = if union == 0 {
            1.0
        } else {
            intersection as f64 / union as f64
        };
        Ok(Self {
            sample_id: sample_id.into(),
            intersection,
            union,
            iou,
            gt_pixels,
        })
    }
}

pub fn eval_sample(pred: &BinaryMask, gt: &BinaryMask, id: &str) -> Result<EvalRecord> {
    let (i, u) = pred.overlap_counts(gt)?;
    EvalRecord::from_counts(id, i as u64, u as u64, gt.count_ones() as u64)
}

/// `threshold -> percent` keyed by the threshold's shortest decimal form
/// (`"0.5"`), so JSON keys sort numerically.
pub type PrecisionTable = BTreeMap<String, f64>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub oiou: f64,
    pub miou: f64,
    pub p_at: PrecisionTable,
    pub s_measure: Option<f64>,
    pub e_measure: Option<f64>,
    pub weighted_f: Option<f64>,
    pub mae: Option<f64>,
}

/// Percent of records with `iou >= x`.
pub fn precision_at(records: &[EvalRecord], x: f64) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    let hits = records.iter().filter(|r| r.iou >= x).count();
    hits as f64 / records.len() as f64 * 100.0
}

/// IoU fields of a report; saliency fields are left empty.
pub fn aggregate(records: &[EvalRecord]) -> Result<MetricsReport> {
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (si, su) = records
        .iter()
        .fold((0u64, 0u64), |(i, u), r| (i + r.intersection, u + r.union));
    let oiou = if su == 0 { 100.0 } else { si as f64 / su as f64 * 100.0 };
    let miou = records.iter().map(|r| r.iou).sum::<f64>() / records.len() as f64 * 100.0;
    let p_at = PRECISION_THRESHOLDS
        .iter()
        .map(|&x| (x.to_string(), precision_at(records, x)))
        .collect();
    Ok(MetricsReport {
        oiou,
        miou,
        p_at,
        s_measure: None,
        e_measure: None,
        weighted_f: None,
        mae: None,
    })
}

/// Keeps a record when its `gt_pixels` falls in `[min_pixels, max_pixels)`
/// of some range and its IoU reaches that range's threshold. Records outside
/// every range are kept.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SizeRangeFilter {
    pub ranges: Vec<SizeRange>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeRange {
    pub min_pixels: u64,
    pub max_pixels: Option<u64>,
    pub min_iou: f64,
}

impl SizeRangeFilter {
    pub fn keeps(&self, r: &EvalRecord) -> bool {
        self.ranges
            .iter()
            .find(|g| r.gt_pixels >= g.min_pixels && g.max_pixels.map_or(true, |m| r.gt_pixels < m))
            .map_or(true, |g| r.iou >= g.min_iou)
    }

    pub fn apply<'a>(&self, records: &'a [EvalRecord]) -> Vec<&'a EvalRecord> {
        records.iter().filter(|r| self.keeps(r)).collect()
    }
}

pub fn write_records_csv<W: io::Write>(writer: W, records: &[EvalRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(writer);
    for r in records {
        w.serialize(r)?;
    }
    if records.is_empty() {
        w.write_record(["sample_id", "intersection", "union", "iou", "gt_pixels"])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records_csv<R: io::Read>(reader: R) -> Result<Vec<EvalRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}
