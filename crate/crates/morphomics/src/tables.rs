//! CSV tables: features, labels, per-vertex curvature, ROC points and
//! feature importance. Floats are written in shortest round-trip form.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use morphomics_core::classifier::{Dataset, FeatureImportance};
use morphomics_core::eval::RocPoint;
use morphomics_core::{CurvatureField, TriangleMesh};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {msg}")]
    Format { path: String, msg: String },
    #[error("feature table has no `label` column")]
    MissingLabels,
    #[error(transparent)]
    Dataset(#[from] morphomics_core::GbtError),
}

fn format_err(path: &Path, msg: impl Into<String>) -> TableError {
    TableError::Format {
        path: path.display().to_string(),
        msg: msg.into(),
    }
}

fn parse_label(s: &str) -> Option<bool> {
    match s.trim() {
        "0" => Some(false),
        "1" => Some(true),
        _ => None,
    }
}

fn label_str(l: bool) -> &'static str {
    if l {
        "1"
    } else {
        "0"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub id: String,
    pub values: Vec<f64>,
    pub label: Option<bool>,
}

/// `id,<feature columns…>[,label]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub names: Vec<String>,
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn has_labels(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.label.is_some())
    }

    pub fn to_dataset(&self) -> Result<Dataset, TableError> {
        let labels: Option<Vec<bool>> = self.rows.iter().map(|r| r.label).collect();
        let labels = labels.ok_or(TableError::MissingLabels)?;
        Ok(Dataset::new(
            self.rows.iter().map(|r| r.values.clone()).collect(),
            labels,
            self.names.clone(),
        )?)
    }

    /// Columns reordered to `names`; every name must be present.
    pub fn select(&self, names: &[String]) -> Result<FeatureTable, String> {
        let idx: Vec<usize> = names
            .iter()
            .map(|n| {
                self.names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| format!("feature `{n}` missing from table"))
            })
            .collect::<Result<_, _>>()?;
        Ok(FeatureTable {
            names: names.to_vec(),
            rows: self
                .rows
                .iter()
                .map(|r| FeatureRow {
                    id: r.id.clone(),
                    values: idx.iter().map(|&i| r.values[i]).collect(),
                    label: r.label,
                })
                .collect(),
        })
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<(), TableError> {
        let labels = self.has_labels();
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["id".to_string()];
        header.extend(self.names.iter().cloned());
        if labels {
            header.push("label".into());
        }
        out.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.id.clone()];
            rec.extend(r.values.iter().map(|v| v.to_string()));
            if labels {
                rec.push(label_str(r.label.unwrap()).into());
            }
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), TableError> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, TableError> {
        let path = path.as_ref();
        let mut rdr = csv::Reader::from_path(path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header.first().map(String::as_str) != Some("id") {
            return Err(format_err(path, "first column must be `id`"));
        }
        let label_col = header.iter().position(|h| h == "label");
        let feature_cols: Vec<usize> = (1..header.len()).filter(|&i| Some(i) != label_col).collect();
        let names = feature_cols.iter().map(|&i| header[i].clone()).collect();
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let at = |msg: String| format_err(path, format!("row {}: {msg}", line + 1));
            let values = feature_cols
                .iter()
                .map(|&i| {
                    let v: f64 = rec[i]
                        .trim()
                        .parse()
                        .map_err(|_| at(format!("`{}` is not a number", &rec[i])))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(at(format!("non-finite value in `{}`", header[i])))
                    }
                })
                .collect::<Result<Vec<f64>, _>>()?;
            let label = match label_col {
                Some(i) => Some(parse_label(&rec[i]).ok_or_else(|| at(format!("label `{}` is not 0 or 1", &rec[i])))?),
                None => None,
            };
            rows.push(FeatureRow {
                id: rec[0].to_string(),
                values,
                label,
            });
        }
        Ok(Self { names, rows })
    }
}

/// One row of `labels.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRecord {
    pub id: String,
    pub label: bool,
    pub kind: String,
    pub seed: u64,
}

pub fn write_labels(path: impl AsRef<Path>, records: &[LabelRecord]) -> Result<(), TableError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["id", "label", "kind", "seed"])?;
    for r in records {
        out.write_record([r.id.as_str(), label_str(r.label), r.kind.as_str(), &r.seed.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `id → label` from a CSV with at least `id` and `label` columns.
pub fn read_labels(path: impl AsRef<Path>) -> Result<BTreeMap<String, bool>, TableError> {
    let path = path.as_ref();
    let mut rdr = csv::Reader::from_path(path)?;
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| format_err(path, format!("missing `{name}` column")))
    };
    let (id, label) = (col("id")?, col("label")?);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let l = parse_label(&rec[label]).ok_or_else(|| format_err(path, format!("bad label `{}`", &rec[label])))?;
        if out.insert(rec[id].to_string(), l).is_some() {
            return Err(format_err(path, format!("duplicate id `{}`", &rec[id])));
        }
    }
    Ok(out)
}

pub fn write_curvature(path: impl AsRef<Path>, mesh: &TriangleMesh, field: &CurvatureField) -> Result<(), TableError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["vertex_index", "x", "y", "z", "mean_curvature", "angle_defect"])?;
    for (i, v) in mesh.vertices.iter().enumerate() {
        out.write_record([
            i.to_string(),
            v[0].to_string(),
            v[1].to_string(),
            v[2].to_string(),
            field.mean[i].to_string(),
            field.angle_defect[i].to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_roc(path: impl AsRef<Path>, points: &[RocPoint]) -> Result<(), TableError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["threshold", "fpr", "tpr"])?;
    for p in points {
        out.write_record([p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_importance(path: impl AsRef<Path>, imp: &FeatureImportance) -> Result<(), TableError> {
    let mut out = csv::Writer::from_path(path)?;
    out.write_record(["feature", "gain", "count"])?;
    for e in &imp.entries {
        out.write_record([e.feature.clone(), e.gain.to_string(), e.count.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(labels: bool) -> FeatureTable {
        FeatureTable {
            names: vec!["bin_0".into(), "energy".into()],
            rows: vec![
                FeatureRow {
                    id: "a".into(),
                    values: vec![0.1, 1e-7],
                    label: labels.then_some(true),
                },
                FeatureRow {
                    id: "b".into(),
                    values: vec![1.0 / 3.0, 12.5],
                    label: labels.then_some(false),
                },
            ],
        }
    }

    #[test]
    fn features_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        for labels in [false, true] {
            let p = dir.path().join("f.csv");
            table(labels).write(&p).unwrap();
            assert_eq!(FeatureTable::read(&p).unwrap(), table(labels));
        }
        let text = std::fs::read_to_string(dir.path().join("f.csv")).unwrap();
        assert!(text.starts_with("id,bin_0,energy,label\n"));
    }

    #[test]
    fn missing_labels_and_bad_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        table(false).write(&p).unwrap();
        assert!(matches!(
            FeatureTable::read(&p).unwrap().to_dataset(),
            Err(TableError::MissingLabels)
        ));
        std::fs::write(&p, "id,x,label\na,NaN,1\n").unwrap();
        assert!(FeatureTable::read(&p).is_err());
        std::fs::write(&p, "id,x,label\na,0.5,2\n").unwrap();
        assert!(FeatureTable::read(&p).is_err());
        std::fs::write(&p, "name,x\na,0.5\n").unwrap();
        assert!(FeatureTable::read(&p).is_err());
    }

    #[test]
    fn select_reorders_and_reports_missing() {
        let t = table(true);
        let s = t.select(&["energy".into(), "bin_0".into()]).unwrap();
        assert_eq!(s.rows[0].values, vec![1e-7, 0.1]);
        assert!(t.select(&["bin_9".into()]).is_err());
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        let recs = vec![
            LabelRecord {
                id: "case_0".into(),
                label: false,
                kind: "ellipsoid".into(),
                seed: 3,
            },
            LabelRecord {
                id: "case_1".into(),
                label: true,
                kind: "spiky_sphere".into(),
                seed: u64::MAX,
            },
        ];
        write_labels(&p, &recs).unwrap();
        let m = read_labels(&p).unwrap();
        assert_eq!(m.len(), 2);
        assert!(m["case_1"] && !m["case_0"]);
    }
}
