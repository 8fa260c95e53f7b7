//! Dataset files.
//!
//! A dataset is a CSV table plus a JSON sidecar (`<name>.meta.json`).
//!
//! Table columns: `user_id`, `partition` (`train`, `test` or `pool`), the 19
//! feature names in schema order, and `label` (`1` trustworthy, `0`
//! untrustworthy, empty for pool rows). Floats are written in Rust's shortest
//! round-trip decimal form, so reading a file back reproduces every value
//! bit for bit.
//!
//! The sidecar carries the format version, feature names, row counts per
//! partition and the fitted normalization parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    DatasetError, FeatureVector, Features, Label, NormalizationParams, SplitDataset, FEATURE_COUNT, FEATURE_NAMES,
};

pub const DATASET_FORMAT_VERSION: u32 = 1;
const FORMAT_NAME: &str = "trustscore-dataset";

#[derive(Debug, Serialize, Deserialize)]
struct Metadata {
    format: String,
    version: u32,
    feature_names: Vec<String>,
    train: usize,
    test: usize,
    pool: usize,
    normalization: NormalizationParams,
}

pub fn metadata_path(path: &Path) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    path.with_file_name(name)
}

pub fn save_dataset(dataset: &SplitDataset, path: &Path) -> Result<(), DatasetError> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    let mut header = vec!["user_id", "partition"];
    header.extend(FEATURE_NAMES);
    header.push("label");
    writer.write_record(&header)?;
    let parts = [("train", &dataset.train_labeled), ("test", &dataset.test_labeled), ("pool", &dataset.pool_unlabeled)];
    for (partition, rows) in parts {
        for row in rows.iter() {
            let mut record = Vec::with_capacity(FEATURE_COUNT + 3);
            record.push(row.user_id.clone());
            record.push(partition.to_string());
            record.extend(row.values.iter().map(|v| v.to_string()));
            record.push(match row.label {
                Some(l) => l.as_index().to_string(),
                None => String::new(),
            });
            writer.write_record(&record)?;
        }
    }
    writer.flush()?;

    let meta = Metadata {
        format: FORMAT_NAME.into(),
        version: DATASET_FORMAT_VERSION,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        train: dataset.train_labeled.len(),
        test: dataset.test_labeled.len(),
        pool: dataset.pool_unlabeled.len(),
        normalization: dataset.normalization_params.clone(),
    };
    let mut out = BufWriter::new(File::create(metadata_path(path))?);
    serde_json::to_writer_pretty(&mut out, &meta)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn load_dataset(path: &Path) -> Result<SplitDataset, DatasetError> {
    let meta: serde_json::Value = serde_json::from_reader(BufReader::new(File::open(metadata_path(path))?))?;
    if meta.get("format").and_then(|v| v.as_str()) != Some(FORMAT_NAME) {
        return Err(DatasetError::Format("metadata is not a dataset sidecar".into()));
    }
    let version = meta.get("version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
    if version != DATASET_FORMAT_VERSION {
        return Err(DatasetError::Version { found: version, expected: DATASET_FORMAT_VERSION });
    }
    let meta: Metadata = serde_json::from_value(meta)?;
    if meta.feature_names != FEATURE_NAMES {
        return Err(DatasetError::Format("feature names differ from the schema".into()));
    }
    if meta.normalization.features.len() != FEATURE_COUNT {
        return Err(DatasetError::Format("normalization parameters have the wrong width".into()));
    }

    let mut reader = csv::Reader::from_reader(BufReader::new(File::open(path)?));
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let mut expected = vec!["user_id".to_string(), "partition".to_string()];
    expected.extend(FEATURE_NAMES.iter().map(|s| s.to_string()));
    expected.push("label".into());
    if header != expected {
        return Err(DatasetError::Format("unexpected header".into()));
    }

    let mut dataset = SplitDataset {
        train_labeled: Vec::with_capacity(meta.train),
        test_labeled: Vec::with_capacity(meta.test),
        pool_unlabeled: Vec::with_capacity(meta.pool),
        normalization_params: meta.normalization,
    };
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| DatasetError::Format(format!("row {}: {e}", idx + 1)))?;
        if record.len() != FEATURE_COUNT + 3 {
            return Err(DatasetError::Format(format!("row {} has {} fields", idx + 1, record.len())));
        }
        let mut values: Features = [0.0; FEATURE_COUNT];
        for (j, v) in values.iter_mut().enumerate() {
            *v = record[j + 2]
                .parse()
                .map_err(|_| DatasetError::Format(format!("row {}: bad number `{}`", idx + 1, &record[j + 2])))?;
        }
        let label = match &record[FEATURE_COUNT + 2] {
            "" => None,
            s => Some(s.parse::<Label>()?),
        };
        let vector = FeatureVector { user_id: record[0].to_string(), values, label };
        let target = match (&record[1], label.is_some()) {
            ("train", true) => &mut dataset.train_labeled,
            ("test", true) => &mut dataset.test_labeled,
            ("pool", false) => &mut dataset.pool_unlabeled,
            (p, _) => return Err(DatasetError::Format(format!("row {}: bad partition/label `{p}`", idx + 1))),
        };
        target.push(vector);
    }
    let counts = (dataset.train_labeled.len(), dataset.test_labeled.len(), dataset.pool_unlabeled.len());
    if counts != (meta.train, meta.test, meta.pool) {
        return Err(DatasetError::Format(format!(
            "row counts {counts:?} do not match metadata ({}, {}, {}); file truncated?",
            meta.train, meta.test, meta.pool
        )));
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::FeatureParams;

    fn sample() -> SplitDataset {
        let row = |id: &str, seed: f64, label| FeatureVector {
            user_id: id.into(),
            values: std::array::from_fn(|j| (seed * (j as f64 + 1.0)).sin().abs() / 3.0),
            label,
        };
        SplitDataset {
            train_labeled: vec![row("a", 0.1, Some(Label::Trustworthy)), row("b", 0.7, Some(Label::Untrustworthy))],
            test_labeled: vec![row("c,quoted", 1.3, Some(Label::Trustworthy))],
            pool_unlabeled: vec![row("d", 2.9, None), row("e", 1e-9, None)],
            normalization_params: NormalizationParams {
                features: (0..FEATURE_COUNT)
                    .map(|j| FeatureParams {
                        clip_low: (j % 2 == 0).then_some(0.1 * j as f64),
                        clip_high: (j % 2 == 0).then_some(1.0 / 3.0 + j as f64),
                        min: -0.1,
                        max: j as f64 + 0.3,
                    })
                    .collect(),
            },
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        let ds = sample();
        save_dataset(&ds, &path).unwrap();
        assert!(dir.path().join("ds.meta.json").exists());
        assert_eq!(load_dataset(&path).unwrap(), ds);
    }

    #[test]
    fn truncated_table_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        save_dataset(&sample(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        std::fs::write(&path, &text[..text.len() - 40]).unwrap();
        assert!(matches!(load_dataset(&path), Err(DatasetError::Format(_))));
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ds.csv");
        save_dataset(&sample(), &path).unwrap();
        let meta_path = metadata_path(&path);
        let meta = std::fs::read_to_string(&meta_path).unwrap();
        std::fs::write(&meta_path, meta.replace("\"version\": 1", "\"version\": 7")).unwrap();
        assert!(matches!(load_dataset(&path), Err(DatasetError::Version { found: 7, expected: 1 })));
    }
}
