//! Curvature-distribution shape features ("3D-morphomics") for binary masks.
//!
//! The pipeline turns a voxel mask into a closed triangle surface, measures
//! per-vertex integrated mean curvature, and summarizes it as a fixed-window
//! histogram plus a total absolute curvature ("energy"). A second-order
//! gradient-boosted tree classifier and the ROC/bootstrap statistics used to
//! evaluate it live alongside.
//!
//! This crate is `no_std` and only needs `alloc`. File formats, the command
//! line front end and parallel batch extraction live in the `morphomics`
//! crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(a < b)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classifier;
pub mod curvature;
pub mod eval;
pub mod features;
pub mod geom;
pub mod mesh;
pub mod pipeline;
pub mod seed;
pub mod synth;
pub mod volume;

pub use classifier::{Dataset, GbtConfig, GbtError, GbtModel};
pub use curvature::{CurvatureError, CurvatureField, Normalization};
pub use eval::{EvalError, EvalReport};
pub use features::{FeatureError, FeatureVector, HistogramSpec};
pub use mesh::{MeshError, TriangleMesh, ValidationReport};
pub use pipeline::{extract_morphomics, PipelineConfig, PipelineError};
pub use volume::{VolumeError, VoxelGrid};
