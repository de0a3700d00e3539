use alloc::string::String;
use alloc::vec::Vec;

use super::{GbtModel, Node};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ImportanceEntry {
    pub feature: String,
    pub index: usize,
    /// Summed split gain.
    pub gain: f64,
    /// Number of splits on the feature.
    pub count: usize,
}

/// Per-feature importance, highest total gain first.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FeatureImportance {
    pub entries: Vec<ImportanceEntry>,
}

impl FeatureImportance {
    pub fn total_gain(&self) -> f64 {
        self.entries.iter().map(|e| e.gain).sum()
    }

    pub fn get(&self, feature: &str) -> Option<&ImportanceEntry> {
        self.entries.iter().find(|e| e.feature == feature)
    }
}

pub fn feature_importance(model: &GbtModel) -> FeatureImportance {
    let mut entries: Vec<ImportanceEntry> = model
        .feature_names
        .iter()
        .enumerate()
        .map(|(index, name)| ImportanceEntry {
            feature: name.clone(),
            index,
            gain: 0.0,
            count: 0,
        })
        .collect();
    for tree in &model.trees {
        for node in &tree.nodes {
            if let Node::Split { feature, gain, .. } = *node {
                entries[feature].gain += gain;
                entries[feature].count += 1;
            }
        }
    }
    entries.sort_by(|a, b| b.gain.total_cmp(&a.gain).then(a.index.cmp(&b.index)));
    FeatureImportance { entries }
}
