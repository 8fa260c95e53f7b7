use serde::{Deserialize, Serialize};

use super::{DatasetError, FeatureSchema, Features, FEATURE_COUNT};

/// Nearest-rank percentile of an ascending-sorted, nonempty column: the value
/// at 1-based rank `ceil(p/100 * n)`, with rank 0 promoted to 1.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    let rank = (pct * n as f64 / 100.0).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Per-feature clip bounds; `None` for features that pass through.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClipBounds(pub [Option<(f64, f64)>; FEATURE_COUNT]);

pub fn fit_clip(matrix: &[Features], schema: &FeatureSchema) -> Result<ClipBounds, DatasetError> {
    let (low, high) = (schema.clip_low, schema.clip_high);
    if !(0.0 <= low && low < high && high <= 100.0) {
        return Err(DatasetError::InvalidPercentiles { low, high });
    }
    if matrix.is_empty() {
        return Err(DatasetError::EmptyMatrix);
    }
    let mut bounds = [None; FEATURE_COUNT];
    for (j, bound) in bounds.iter_mut().enumerate() {
        if !schema.unbounded[j] {
            continue;
        }
        let mut column: Vec<f64> = matrix.iter().map(|row| row[j]).collect();
        column.sort_unstable_by(f64::total_cmp);
        *bound = Some((nearest_rank(&column, low), nearest_rank(&column, high)));
    }
    Ok(ClipBounds(bounds))
}

pub fn apply_clip(matrix: &[Features], bounds: &ClipBounds) -> Vec<Features> {
    matrix
        .iter()
        .map(|row| {
            let mut out = *row;
            for (x, bound) in out.iter_mut().zip(bounds.0.iter()) {
                if let Some((lo, hi)) = bound {
                    *x = x.clamp(*lo, *hi);
                }
            }
            out
        })
        .collect()
}

/// Per-column `(min, max)`.
pub type ColumnRanges = [(f64, f64); FEATURE_COUNT];

/// Min-max scales every column to `[0, 1]`. Constant columns map to 0.
/// Returns the scaled matrix and the per-column `(min, max)`.
pub fn min_max_normalize(matrix: &[Features]) -> Result<(Vec<Features>, ColumnRanges), DatasetError> {
    if matrix.is_empty() {
        return Err(DatasetError::EmptyMatrix);
    }
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); FEATURE_COUNT];
    for row in matrix {
        for (r, &x) in ranges.iter_mut().zip(row.iter()) {
            r.0 = r.0.min(x);
            r.1 = r.1.max(x);
        }
    }
    let scaled = matrix.iter().map(|row| scale_row(row, &ranges)).collect();
    Ok((scaled, ranges))
}

fn scale(x: f64, min: f64, max: f64) -> f64 {
    if max > min {
        ((x - min) / (max - min)).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn scale_row(row: &Features, ranges: &ColumnRanges) -> Features {
    let mut out = [0.0; FEATURE_COUNT];
    for j in 0..FEATURE_COUNT {
        out[j] = scale(row[j], ranges[j].0, ranges[j].1);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureParams {
    pub clip_low: Option<f64>,
    pub clip_high: Option<f64>,
    pub min: f64,
    pub max: f64,
}

/// Fitted clip bounds and min-max ranges, reusable for new rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationParams {
    pub features: Vec<FeatureParams>,
}

impl NormalizationParams {
    /// Clip then scale a raw row. Values outside the fitted range saturate at
    /// 0 or 1.
    pub fn transform(&self, raw: &Features) -> Features {
        let mut out = [0.0; FEATURE_COUNT];
        for (j, p) in self.features.iter().enumerate() {
            let mut x = raw[j];
            if let (Some(lo), Some(hi)) = (p.clip_low, p.clip_high) {
                x = x.clamp(lo, hi);
            }
            out[j] = scale(x, p.min, p.max);
        }
        out
    }

    /// Maps a scaled value back to the (clipped) raw scale.
    pub fn inverse(&self, feature: usize, scaled: f64) -> f64 {
        let p = &self.features[feature];
        p.min + scaled * (p.max - p.min)
    }
}

pub fn fit_transform(
    matrix: &[Features],
    schema: &FeatureSchema,
) -> Result<(Vec<Features>, NormalizationParams), DatasetError> {
    let bounds = fit_clip(matrix, schema)?;
    let clipped = apply_clip(matrix, &bounds);
    let (scaled, ranges) = min_max_normalize(&clipped)?;
    let features = bounds
        .0
        .iter()
        .zip(ranges.iter())
        .map(|(b, &(min, max))| FeatureParams { clip_low: b.map(|b| b.0), clip_high: b.map(|b| b.1), min, max })
        .collect();
    Ok((scaled, NormalizationParams { features }))
}
