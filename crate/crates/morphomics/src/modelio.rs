//! JSON persistence for models and evaluation reports.

use std::path::Path;

use morphomics_core::classifier::{GbtConfig, GbtModel, Tree};
use morphomics_core::eval::EvalReport;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("model format version {found}, this build reads {expected}")]
    Version { found: u32, expected: u32 },
    #[error("tree {0} is malformed")]
    BadTree(usize),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    base_score: f64,
    learning_rate: f64,
    feature_names: Vec<String>,
    config: GbtConfig,
    trees: Vec<Tree>,
}

pub fn model_to_json(model: &GbtModel) -> String {
    let file = ModelFile {
        version: MODEL_VERSION,
        base_score: model.base_score,
        learning_rate: model.learning_rate,
        feature_names: model.feature_names.clone(),
        config: model.config,
        trees: model.trees.clone(),
    };
    serde_json::to_string(&file).expect("model serializes") + "\n"
}

pub fn model_from_json(text: &str) -> Result<GbtModel, ModelIoError> {
    #[derive(Deserialize)]
    struct Version {
        version: u32,
    }
    let v: Version = serde_json::from_str(text)?;
    if v.version != MODEL_VERSION {
        return Err(ModelIoError::Version {
            found: v.version,
            expected: MODEL_VERSION,
        });
    }
    let f: ModelFile = serde_json::from_str(text)?;
    let nf = f.feature_names.len();
    if let Some(i) = f.trees.iter().position(|t| !t.is_well_formed(nf)) {
        return Err(ModelIoError::BadTree(i));
    }
    Ok(GbtModel {
        base_score: f.base_score,
        learning_rate: f.learning_rate,
        feature_names: f.feature_names,
        config: f.config,
        trees: f.trees,
    })
}

pub fn save_model(path: impl AsRef<Path>, model: &GbtModel) -> Result<(), ModelIoError> {
    std::fs::write(path, model_to_json(model))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<GbtModel, ModelIoError> {
    model_from_json(&std::fs::read_to_string(path)?)
}

pub fn save_report(path: impl AsRef<Path>, report: &EvalReport) -> Result<(), ModelIoError> {
    std::fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}

pub fn load_report(path: impl AsRef<Path>) -> Result<EvalReport, ModelIoError> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use morphomics_core::classifier::{train, Dataset};
    use morphomics_core::seed;
    use rand::Rng;

    fn model() -> GbtModel {
        let mut rng = seed::rng(1);
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let labels = rows.iter().map(|r| r[0] * r[1] + 0.1 * r[0] > 0.0).collect();
        let d = Dataset::unnamed(rows, labels).unwrap();
        let cfg = GbtConfig {
            n_estimators: 40,
            subsample: 0.8,
            colsample_bytree: 0.5,
            ..GbtConfig::default()
        };
        train(&d, &cfg).unwrap()
    }

    #[test]
    fn round_trip_predicts_bitwise_equal() {
        let m = model();
        let back = model_from_json(&model_to_json(&m)).unwrap();
        assert_eq!(back, m);
        let mut rng = seed::rng(2);
        for _ in 0..100 {
            let row = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            assert_eq!(
                back.predict_proba(&row).unwrap().to_bits(),
                m.predict_proba(&row).unwrap().to_bits()
            );
        }
    }

    #[test]
    fn truncated_and_wrong_version_are_errors() {
        let text = model_to_json(&model());
        assert!(matches!(
            model_from_json(&text[..text.len() / 2]),
            Err(ModelIoError::Json(_))
        ));
        let v2 = text.replacen("\"version\":1", "\"version\":2", 1);
        assert!(matches!(
            model_from_json(&v2),
            Err(ModelIoError::Version { found: 2, .. })
        ));
    }

    #[test]
    fn empty_model_round_trip_predicts_half() {
        let m = GbtModel::constant(0.0, vec!["a".into()], GbtConfig::default());
        let back = model_from_json(&model_to_json(&m)).unwrap();
        assert_eq!(back.predict_proba(&[0.3]).unwrap(), 0.5);
    }
}
