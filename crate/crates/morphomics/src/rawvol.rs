//! Headerless `uint8` volumes with a JSON sidecar next to them
//! (`mask.raw` + `mask.json`).

use std::path::{Path, PathBuf};

use morphomics_core::{VolumeError, VoxelGrid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RawError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("sidecar {path}: {source}")]
    Sidecar { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

/// Geometry of a raw volume, x fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub dims: [usize; 3],
    pub spacing_mm: [f64; 3],
    #[serde(default)]
    pub origin_mm: [f64; 3],
}

pub fn sidecar_path(raw: &Path) -> PathBuf {
    raw.with_extension("json")
}

pub fn read_raw(path: impl AsRef<Path>) -> Result<VoxelGrid, RawError> {
    let path = path.as_ref();
    let side = sidecar_path(path);
    let text = std::fs::read_to_string(&side)?;
    let meta: Sidecar = serde_json::from_str(&text).map_err(|source| RawError::Sidecar { path: side, source })?;
    let bytes = std::fs::read(path)?;
    Ok(VoxelGrid::from_bytes(
        meta.dims,
        meta.spacing_mm,
        meta.origin_mm,
        &bytes,
    )?)
}

pub fn write_raw(path: impl AsRef<Path>, grid: &VoxelGrid) -> Result<(), RawError> {
    let path = path.as_ref();
    let meta = Sidecar {
        dims: grid.dims(),
        spacing_mm: grid.spacing(),
        origin_mm: grid.origin(),
    };
    let json = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    std::fs::write(sidecar_path(path), json + "\n")?;
    std::fs::write(path, grid.to_bytes())?;
    Ok(())
}
