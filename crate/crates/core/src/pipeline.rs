//! End-to-end mask to feature extraction.

use thiserror::Error;

use crate::curvature::{mesh_energy, CurvatureError, CurvatureField, Normalization};
use crate::features::{curvature_histogram, FeatureError, FeatureVector, HistogramSpec};
use crate::mesh::{marching_cubes, simplify, MeshError, SimplifyConfig, TriangleMesh, DEFAULT_ISO};
use crate::volume::{extract_patch, resample_nearest, VolumeError, DEFAULT_PATCH_SIDE, DEFAULT_SPACING_MM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Volume(#[from] VolumeError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PipelineConfig {
    /// Isotropic resampling target in mm.
    pub spacing_mm: f64,
    /// Patch side in voxels; `None` keeps the whole resampled grid.
    pub patch_side: Option<usize>,
    pub iso: f64,
    pub simplify: SimplifyConfig,
    pub normalization: Normalization,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self::with_spacing(DEFAULT_SPACING_MM)
    }
}

impl PipelineConfig {
    pub fn with_spacing(spacing_mm: f64) -> Self {
        Self {
            spacing_mm,
            patch_side: Some(DEFAULT_PATCH_SIDE),
            iso: DEFAULT_ISO,
            simplify: SimplifyConfig::for_spacing(spacing_mm),
            normalization: Normalization::Integrated,
        }
    }
}

/// Intermediate products of one extraction.
#[derive(Debug, Clone)]
pub struct Morphomics {
    pub mesh: TriangleMesh,
    pub curvature: CurvatureField,
    pub features: FeatureVector,
}

/// resample → patch → marching cubes → simplify → curvature → histogram and
/// energy. All surface components pool into one histogram and one energy.
pub fn extract_morphomics_detailed(
    grid: &crate::volume::VoxelGrid,
    spec: &HistogramSpec,
    config: &PipelineConfig,
) -> Result<Morphomics, PipelineError> {
    spec.validate()?;
    let resampled = resample_nearest(grid, [config.spacing_mm; 3])?;
    let patch = match config.patch_side {
        Some(side) => extract_patch(&resampled, side)?,
        None => resampled,
    };
    let raw = marching_cubes(&patch, config.iso)?;
    let mesh = simplify(&raw, &config.simplify)?;
    let curvature = CurvatureField::compute(&mesh, config.normalization)?;
    let bins = curvature_histogram(&curvature.mean, spec)?;
    let energy = mesh_energy(&curvature);
    Ok(Morphomics {
        mesh,
        curvature,
        features: FeatureVector { bins, energy },
    })
}

pub fn extract_morphomics(
    grid: &crate::volume::VoxelGrid,
    spec: &HistogramSpec,
    config: &PipelineConfig,
) -> Result<FeatureVector, PipelineError> {
    extract_morphomics_detailed(grid, spec, config).map(|m| m.features)
}
