//! Labeled curve datasets and their on-disk formats.
//!
//! JSON format: `{"curves":[{"id":"c1","label":0,"points":[[x,y,...],...]},...]}`.
//! CSV directory format: one `<id>.csv` per curve with one comma-separated
//! vertex per row, plus a sidecar `labels.csv` with `id,label` rows.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Curve, Point};

/// One identified, labeled curve.
#[derive(Debug, Clone)]
pub struct DatasetItem {
    pub id: String,
    pub label: i64,
    pub curve: Curve,
}

/// A dataset of labeled curves sharing one ambient dimension.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    items: Vec<DatasetItem>,
}

impl LabeledDataset {
    pub fn new(items: Vec<DatasetItem>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidCurve("dataset must contain at least one curve".into()));
        }
        let dim = items[0].curve.dim();
        let mut seen = std::collections::HashSet::new();
        for item in &items {
            if !seen.insert(item.id.clone()) {
                return Err(Error::InvalidCurve(format!("duplicate curve id '{}'", item.id)));
            }
            if item.curve.dim() != dim {
                return Err(Error::InvalidCurve(format!(
                    "curve '{}' has dimension {} but the dataset has dimension {dim}",
                    item.id,
                    item.curve.dim()
                )));
            }
        }
        Ok(LabeledDataset { items })
    }

    pub fn items(&self) -> &[DatasetItem] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.items[0].curve.dim()
    }

    pub fn ids(&self) -> Vec<String> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    pub fn labels(&self) -> Vec<i64> {
        self.items.iter().map(|i| i.label).collect()
    }

    pub fn curves(&self) -> Vec<Curve> {
        self.items.iter().map(|i| i.curve.clone()).collect()
    }

    /// Copy with consecutive duplicate vertices merged in every curve.
    pub fn dedup_vertices(&self) -> LabeledDataset {
        LabeledDataset {
            items: self
                .items
                .iter()
                .map(|item| DatasetItem {
                    id: item.id.clone(),
                    label: item.label,
                    curve: item.curve.dedup_consecutive(),
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonCurve {
    id: String,
    label: i64,
    points: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct JsonDataset {
    curves: Vec<JsonCurve>,
}

/// Supported dataset formats.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetFormat {
    Json,
    CsvDir,
}

/// Loads a dataset, auto-detecting the format from the path: directories are
/// CSV directories, files are JSON.
pub fn load_dataset(path: &Path) -> Result<LabeledDataset> {
    if path.is_dir() {
        load_csv_dir(path)
    } else {
        load_json(path)
    }
}

pub fn load_json(path: &Path) -> Result<LabeledDataset> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let parsed: JsonDataset = serde_json::from_str(&text)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    if parsed.curves.is_empty() {
        return Err(Error::parse(path.display().to_string(), "empty curve list"));
    }
    let items = parsed
        .curves
        .into_iter()
        .map(|c| {
            let points = c
                .points
                .into_iter()
                .map(Point::new)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| Error::parse(path.display().to_string(), format!("curve '{}': {e}", c.id)))?;
            let curve = Curve::new(points)
                .map_err(|e| Error::parse(path.display().to_string(), format!("curve '{}': {e}", c.id)))?;
            Ok(DatasetItem {
                id: c.id,
                label: c.label,
                curve,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(items)
}

pub fn save_json(dataset: &LabeledDataset, path: &Path) -> Result<()> {
    let doc = JsonDataset {
        curves: dataset
            .items()
            .iter()
            .map(|item| JsonCurve {
                id: item.id.clone(),
                label: item.label,
                points: item
                    .curve
                    .vertices()
                    .iter()
                    .map(|p| p.coords().to_vec())
                    .collect(),
            })
            .collect(),
    };
    let text = serde_json::to_string(&doc)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

fn load_csv_dir(dir: &Path) -> Result<LabeledDataset> {
    let labels_path = dir.join("labels.csv");
    let labels_text = std::fs::read_to_string(&labels_path)
        .map_err(|e| Error::io(labels_path.display().to_string(), e))?;
    let mut labels = std::collections::HashMap::new();
    for (lineno, line) in labels_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == "id,label") {
            continue;
        }
        let (id, label) = line.split_once(',').ok_or_else(|| {
            Error::parse(
                labels_path.display().to_string(),
                format!("line {}: expected 'id,label'", lineno + 1),
            )
        })?;
        let label: i64 = label.trim().parse().map_err(|_| {
            Error::parse(
                labels_path.display().to_string(),
                format!("line {}: label '{}' is not an integer", lineno + 1, label),
            )
        })?;
        labels.insert(id.trim().to_string(), label);
    }

    let mut ids: Vec<String> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir.display().to_string(), e))?
        .filter_map(|entry| entry.ok())
        .filter_map(|entry| {
            let path = entry.path();
            let stem = path.file_stem()?.to_str()?.to_string();
            (path.extension().and_then(|e| e.to_str()) == Some("csv") && stem != "labels")
                .then_some(stem)
        })
        .collect();
    ids.sort();
    if ids.is_empty() {
        return Err(Error::parse(dir.display().to_string(), "no curve files found"));
    }

    let items = ids
        .into_iter()
        .map(|id| {
            let file = dir.join(format!("{id}.csv"));
            let text =
                std::fs::read_to_string(&file).map_err(|e| Error::io(file.display().to_string(), e))?;
            let mut points = Vec::new();
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let coords: Vec<f64> = line
                    .split(',')
                    .map(|c| {
                        c.trim().parse::<f64>().map_err(|_| {
                            Error::parse(
                                file.display().to_string(),
                                format!("line {}: '{}' is not a number", lineno + 1, c),
                            )
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                points.push(Point::new(coords).map_err(|e| {
                    Error::parse(file.display().to_string(), format!("line {}: {e}", lineno + 1))
                })?);
            }
            let curve = Curve::new(points)
                .map_err(|e| Error::parse(file.display().to_string(), e.to_string()))?;
            let label = *labels.get(&id).ok_or_else(|| {
                Error::parse(
                    labels_path.display().to_string(),
                    format!("no label for curve '{id}'"),
                )
            })?;
            Ok(DatasetItem { id, label, curve })
        })
        .collect::<Result<Vec<_>>>()?;
    LabeledDataset::new(items)
}

/// Formats a float with 17 significant digits, enough to round-trip f64.
pub fn format_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Writes a symmetric pairwise matrix as CSV with ids in the first row and
/// column and entries formatted with 17 significant digits.
pub fn save_matrix(matrix: &[Vec<f64>], ids: &[String], path: &Path) -> Result<()> {
    if matrix.len() != ids.len() {
        return Err(Error::InvalidParameter(
            "matrix size and id count must match".into(),
        ));
    }
    let mut out = Vec::new();
    write!(out, "id").expect("vec write");
    for id in ids {
        write!(out, ",{id}").expect("vec write");
    }
    writeln!(out).expect("vec write");
    for (row, id) in matrix.iter().zip(ids) {
        write!(out, "{id}").expect("vec write");
        for &v in row {
            write!(out, ",{}", format_f64(v)).expect("vec write");
        }
        writeln!(out).expect("vec write");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

/// Reads a matrix written by [`save_matrix`], returning ids and entries.
pub fn load_matrix(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(path.display().to_string(), "empty matrix file"))?;
    let ids: Vec<String> = header.split(',').skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let _row_id = fields.next();
        let row: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| {
                    Error::parse(
                        path.display().to_string(),
                        format!("line {}: '{}' is not a number", lineno + 2, f),
                    )
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != ids.len() {
            return Err(Error::parse(
                path.display().to_string(),
                format!("line {}: expected {} entries, got {}", lineno + 2, ids.len(), row.len()),
            ));
        }
        rows.push(row);
    }
    if rows.len() != ids.len() {
        return Err(Error::parse(
            path.display().to_string(),
            format!("expected {} rows, got {}", ids.len(), rows.len()),
        ));
    }
    Ok((ids, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn sample() -> LabeledDataset {
        LabeledDataset::new(vec![
            DatasetItem {
                id: "c1".into(),
                label: 0,
                curve: Curve::new(vec![
                    Point::new(vec![0.1, 0.2]).unwrap(),
                    Point::new(vec![1.0 / 3.0, -0.7]).unwrap(),
                ])
                .unwrap(),
            },
            DatasetItem {
                id: "c2".into(),
                label: 1,
                curve: Curve::new(vec![Point::new(vec![5.0, 2.0_f64.sqrt()]).unwrap()]).unwrap(),
            },
        ])
        .unwrap()
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("data.json");
        let dataset = sample();
        save_json(&dataset, &path).unwrap();
        let loaded = load_dataset(&path).unwrap();
        assert_eq!(loaded.len(), 2);
        for (a, b) in dataset.items().iter().zip(loaded.items()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.label, b.label);
            for (p, q) in a.curve.vertices().iter().zip(b.curve.vertices()) {
                for (x, y) in p.coords().iter().zip(q.coords()) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }

    #[test]
    fn empty_curve_list_is_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("empty.json");
        std::fs::write(&path, r#"{"curves":[]}"#).unwrap();
        assert!(load_dataset(&path).is_err());
    }

    #[test]
    fn parse_error_carries_path() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, "{not json").unwrap();
        let err = load_dataset(&path).unwrap_err().to_string();
        assert!(err.contains("bad.json"));
    }

    #[test]
    fn inconsistent_dimension_is_error() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("dims.json");
        std::fs::write(
            &path,
            r#"{"curves":[{"id":"a","label":0,"points":[[0,0]]},{"id":"b","label":1,"points":[[1]]}]}"#,
        )
        .unwrap();
        assert!(load_dataset(&path).is_err());
    }

    #[test]
    fn csv_dir_matches_equivalent_json() {
        let dir = tempdir().unwrap();
        let json_path = dir.path().join("data.json");
        let dataset = sample();
        save_json(&dataset, &json_path).unwrap();

        let csv_dir = dir.path().join("curves");
        std::fs::create_dir(&csv_dir).unwrap();
        let mut labels = String::from("id,label\n");
        for item in dataset.items() {
            let mut body = String::new();
            for p in item.curve.vertices() {
                let row: Vec<String> = p.coords().iter().map(|c| format_f64(*c)).collect();
                body.push_str(&row.join(","));
                body.push('\n');
            }
            std::fs::write(csv_dir.join(format!("{}.csv", item.id)), body).unwrap();
            labels.push_str(&format!("{},{}\n", item.id, item.label));
        }
        std::fs::write(csv_dir.join("labels.csv"), labels).unwrap();

        let from_json = load_dataset(&json_path).unwrap();
        let from_csv = load_dataset(&csv_dir).unwrap();
        assert_eq!(from_json.len(), from_csv.len());
        for (a, b) in from_json.items().iter().zip(from_csv.items()) {
            assert_eq!(a.id, b.id);
            assert_eq!(a.label, b.label);
            assert_eq!(a.curve, b.curve);
        }
    }

    #[test]
    fn missing_label_is_error() {
        let dir = tempdir().unwrap();
        let csv_dir = dir.path().join("curves");
        std::fs::create_dir(&csv_dir).unwrap();
        std::fs::write(csv_dir.join("a.csv"), "0.0\n1.0\n").unwrap();
        std::fs::write(csv_dir.join("labels.csv"), "").unwrap();
        let err = load_dataset(&csv_dir).unwrap_err().to_string();
        assert!(err.contains("no label"), "{err}");
    }

    #[test]
    fn duplicate_ids_rejected() {
        let item = DatasetItem {
            id: "x".into(),
            label: 0,
            curve: Curve::from_values(&[0.0]).unwrap(),
        };
        assert!(LabeledDataset::new(vec![item.clone(), item]).is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let ids = vec!["a".to_string(), "b".to_string()];
        let matrix = vec![vec![0.0, 1.0 / 3.0], vec![1.0 / 3.0, 0.0]];
        save_matrix(&matrix, &ids, &path).unwrap();
        let (rids, rmatrix) = load_matrix(&path).unwrap();
        assert_eq!(rids, ids);
        assert_eq!(rmatrix[0][1].to_bits(), (1.0f64 / 3.0).to_bits());
    }

    #[test]
    fn format_f64_has_17_significant_digits() {
        assert_eq!(format_f64(0.4), "4.0000000000000002e-1");
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
        let x = std::f64::consts::PI;
        assert_eq!(format_f64(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
