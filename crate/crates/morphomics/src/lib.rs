//! File formats, batch extraction and the `morphomics` command line tool
//! built on [`morphomics_core`].
//!
//! Masks are read from NRRD or from headerless `.raw` files with a JSON
//! sidecar. Extraction fans out over input files; every other step is
//! single threaded and all randomness derives from one `--seed`.

pub mod commands;
pub mod meshio;
pub mod modelio;
pub mod nrrd;
pub mod rawvol;
pub mod tables;

pub use morphomics_core as core;
