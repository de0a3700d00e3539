//! Synthetic labeled masks: smooth ellipsoids (benign) against spiky or
//! lobulated spheres (malignant).
//!
//! Every shape is star-shaped about its center with a radius function
//! `r(u)` over unit directions `u`. Spikes and lobes are Gaussian bumps in
//! the chord distance between `u` and a bump axis; jitter is a handful of wide bumps
//! of either sign. A voxel is occupied iff its center lies strictly inside.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use core::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::features::HistogramSpec;
use crate::geom::{self, Vec3};
use crate::pipeline::{extract_morphomics_detailed, PipelineConfig};
use crate::seed;
use crate::volume::{VolumeError, VoxelGrid};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("invalid shape: {0}")]
    BadShape(&'static str),
    #[error("shape reaches within {margin} voxels of the grid border")]
    ExceedsGrid { margin: usize },
    #[error("no topologically clean shape after {0} draws")]
    Exhausted(usize),
    #[error(transparent)]
    Volume(#[from] VolumeError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Sphere,
    Ellipsoid,
    SpikySphere,
    Lobulated,
}

impl ShapeKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Sphere => "sphere",
            Self::Ellipsoid => "ellipsoid",
            Self::SpikySphere => "spiky_sphere",
            Self::Lobulated => "lobulated",
        }
    }

    pub fn has_bumps(self) -> bool {
        matches!(self, Self::SpikySphere | Self::Lobulated)
    }
}

/// Shape parameters. Spheres and bumpy spheres use `semi_axes_mm[0]` as the
/// radius; ellipsoids use all three axes in a seeded random orientation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub semi_axes_mm: [f64; 3],
    pub spike_count: usize,
    pub spike_height_mm: f64,
    /// Standard deviation of each bump, measured along the surface.
    pub spike_width_mm: f64,
    /// Amplitude of the smooth surface noise.
    pub jitter_mm: f64,
    pub seed: u64,
}

const JITTER_BUMPS: usize = 8;
const JITTER_WIDTH_RAD: f64 = 0.7;
/// Bumps are truncated where they fall below e^-30 of their height.
const BUMP_CUTOFF: f64 = 30.0;

impl ShapeSpec {
    pub fn sphere(radius_mm: f64, seed: u64) -> Self {
        Self {
            kind: ShapeKind::Sphere,
            semi_axes_mm: [radius_mm; 3],
            spike_count: 0,
            spike_height_mm: 0.0,
            spike_width_mm: 0.0,
            jitter_mm: 0.0,
            seed,
        }
    }

    pub fn ellipsoid(semi_axes_mm: [f64; 3], seed: u64) -> Self {
        Self {
            kind: ShapeKind::Ellipsoid,
            semi_axes_mm,
            ..Self::sphere(1.0, seed)
        }
    }

    pub fn spiky(radius_mm: f64, count: usize, height_mm: f64, width_mm: f64, seed: u64) -> Self {
        Self {
            kind: ShapeKind::SpikySphere,
            spike_count: count,
            spike_height_mm: height_mm,
            spike_width_mm: width_mm,
            ..Self::sphere(radius_mm, seed)
        }
    }

    pub fn lobulated(radius_mm: f64, count: usize, height_mm: f64, width_mm: f64, seed: u64) -> Self {
        Self {
            kind: ShapeKind::Lobulated,
            ..Self::spiky(radius_mm, count, height_mm, width_mm, seed)
        }
    }

    pub fn with_jitter(self, jitter_mm: f64) -> Self {
        Self { jitter_mm, ..self }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let axes = match self.kind {
            ShapeKind::Ellipsoid => &self.semi_axes_mm[..],
            _ => &self.semi_axes_mm[..1],
        };
        if axes.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(SynthError::BadShape("radii must be positive"));
        }
        if !(self.spike_height_mm >= 0.0) || !self.spike_height_mm.is_finite() {
            return Err(SynthError::BadShape("spike height must be non-negative"));
        }
        if self.kind.has_bumps() && self.spike_count > 0 && !(self.spike_width_mm > 0.0) {
            return Err(SynthError::BadShape("spike width must be positive"));
        }
        if !(self.jitter_mm >= 0.0) || !self.jitter_mm.is_finite() {
            return Err(SynthError::BadShape("jitter must be non-negative"));
        }
        Ok(())
    }

    /// All lengths multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self {
            semi_axes_mm: self.semi_axes_mm.map(|a| a * s),
            spike_height_mm: self.spike_height_mm * s,
            spike_width_mm: self.spike_width_mm * s,
            jitter_mm: self.jitter_mm * s,
            ..*self
        }
    }

    /// The radius function with its random draws resolved.
    pub fn surface(&self) -> RadialSurface {
        let axes = match self.kind {
            ShapeKind::Ellipsoid => self.semi_axes_mm,
            _ => [self.semi_axes_mm[0]; 3],
        };
        let frame = if self.kind == ShapeKind::Ellipsoid {
            random_frame(&mut seed::rng(seed::derive(self.seed, "shape/orientation")))
        } else {
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        };
        let mut bumps = Vec::new();
        if self.kind.has_bumps() && self.spike_count > 0 && self.spike_height_mm > 0.0 {
            let mut rng = seed::rng(seed::derive(self.seed, "shape/spikes"));
            // Bump width is given in mm on a sphere of the mean radius.
            let sigma = self.spike_width_mm / self.semi_axes_mm[0];
            for _ in 0..self.spike_count {
                bumps.push(Bump {
                    axis: random_direction(&mut rng),
                    height: self.spike_height_mm,
                    sigma,
                });
            }
        }
        if self.jitter_mm > 0.0 {
            let mut rng = seed::rng(seed::derive(self.seed, "shape/jitter"));
            for _ in 0..JITTER_BUMPS {
                let axis = random_direction(&mut rng);
                let height = rng.gen_range(-1.0..=1.0) * self.jitter_mm;
                bumps.push(Bump {
                    axis,
                    height,
                    sigma: JITTER_WIDTH_RAD,
                });
            }
        }
        RadialSurface { axes, frame, bumps }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bump {
    axis: Vec3,
    height: f64,
    sigma: f64,
}

/// Star-shaped surface `{ r(u) u }` about the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSurface {
    axes: [f64; 3],
    /// Rows are the ellipsoid's principal directions.
    frame: [Vec3; 3],
    bumps: Vec<Bump>,
}

impl RadialSurface {
    /// Radius along unit direction `u`.
    pub fn radius(&self, u: Vec3) -> f64 {
        let mut q = 0.0;
        for k in 0..3 {
            let c = geom::dot(self.frame[k], u) / self.axes[k];
            q += c * c;
        }
        let mut r = 1.0 / libm::sqrt(q);
        for b in &self.bumps {
            // Squared chord between u and the axis; close to θ² near the axis.
            let z = (2.0 - 2.0 * geom::dot(u, b.axis)) / (2.0 * b.sigma * b.sigma);
            if z < BUMP_CUTOFF {
                r += b.height * libm::exp(-z);
            }
        }
        r
    }

    /// Lower and upper bounds on `r(u)` over all directions.
    pub fn radius_bounds(&self) -> (f64, f64) {
        let lo_axis = self.axes.iter().copied().fold(f64::INFINITY, f64::min);
        let hi_axis = self.axes.iter().copied().fold(0.0, f64::max);
        let neg: f64 = self.bumps.iter().map(|b| b.height.min(0.0)).sum();
        let pos: f64 = self.bumps.iter().map(|b| b.height.max(0.0)).sum();
        (lo_axis + neg, hi_axis + pos)
    }

    pub fn contains(&self, p: Vec3) -> bool {
        let d = geom::norm(p);
        if d == 0.0 {
            return self.radius([0.0, 0.0, 1.0]) > 0.0;
        }
        d < self.radius(geom::scale(p, 1.0 / d))
    }

    /// `∫ r(u)³ / 3 dΩ` by an equal-area spiral rule with `n` nodes.
    pub fn volume(&self, n: usize) -> f64 {
        let golden = PI * (3.0 - libm::sqrt(5.0));
        let mut total = 0.0;
        for i in 0..n {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
            let rho = libm::sqrt(1.0 - z * z);
            let phi = golden * i as f64;
            let r = self.radius([rho * libm::cos(phi), rho * libm::sin(phi), z]);
            total += r * r * r;
        }
        4.0 * PI / n as f64 * total / 3.0
    }
}

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    let z: f64 = rng.gen_range(-1.0..=1.0);
    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
    let rho = libm::sqrt((1.0 - z * z).max(0.0));
    [rho * libm::cos(phi), rho * libm::sin(phi), z]
}

fn random_frame(rng: &mut ChaCha8Rng) -> [Vec3; 3] {
    let a = random_direction(rng);
    let helper = if a[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let b = geom::normalize(geom::cross(a, helper)).expect("helper is not parallel");
    let c = geom::cross(a, b);
    [a, b, c]
}

pub const MIN_MARGIN_VOXELS: usize = 2;

/// Occupancy of voxel centers in a grid centered on the shape. The grid's
/// origin is placed so that the shape center is the world origin.
pub fn rasterize(spec: &ShapeSpec, spacing: [f64; 3], dims: [usize; 3]) -> Result<VoxelGrid, SynthError> {
    spec.validate()?;
    let origin = [0, 1, 2].map(|k| -(dims[k] as f64 - 1.0) / 2.0 * spacing[k]);
    let mut grid = VoxelGrid::empty(dims, spacing, origin)?;
    let surface = spec.surface();
    let (r_lo, r_hi) = surface.radius_bounds();
    let m = MIN_MARGIN_VOXELS;
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let p = grid.world([x as f64, y as f64, z as f64]);
                let d = geom::norm(p);
                if d >= r_hi {
                    continue;
                }
                if d < r_lo || surface.contains(p) {
                    let inside = |i: usize, n: usize| i >= m && i + m < n;
                    if !(inside(x, dims[0]) && inside(y, dims[1]) && inside(z, dims[2])) {
                        return Err(SynthError::ExceedsGrid { margin: m });
                    }
                    grid.set(x, y, z, true);
                }
            }
        }
    }
    Ok(grid)
}

/// Corpus generation settings.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorpusConfig {
    pub dims: [usize; 3],
    pub spacing_mm: f64,
    /// Equivalent-sphere radius range shared by both classes.
    pub radius_mm: (f64, f64),
    pub jitter_mm: f64,
    /// Redraws allowed per case before giving up.
    pub max_attempts: usize,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            dims: [64; 3],
            spacing_mm: 0.625,
            radius_mm: (5.0, 9.0),
            jitter_mm: 0.3,
            max_attempts: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusCase {
    pub id: String,
    pub label: bool,
    pub spec: ShapeSpec,
    pub grid: VoxelGrid,
}

const VOLUME_NODES: usize = 4096;
/// Share of malignant cases drawn spiky; the rest are lobulated.
pub const SPIKY_FRACTION: f64 = 0.75;

/// A shape of the requested class whose volume equals that of a sphere of
/// radius `r_eq`. Parameters are expressed relative to `r_eq`, then the
/// whole shape is rescaled to hit the target volume.
pub fn draw_shape(malignant: bool, r_eq: f64, jitter_mm: f64, rng: &mut ChaCha8Rng) -> ShapeSpec {
    let seed = rng.gen::<u64>();
    let raw = if malignant {
        if rng.gen_bool(SPIKY_FRACTION) {
            let count = rng.gen_range(8..=24);
            let height = rng.gen_range(0.35..0.7) * r_eq;
            let width = rng.gen_range(0.12..0.2) * r_eq;
            ShapeSpec::spiky(r_eq, count, height, width, seed)
        } else {
            let count = rng.gen_range(10..=20);
            let height = rng.gen_range(0.25..0.45) * r_eq;
            let width = rng.gen_range(0.18..0.28) * r_eq;
            ShapeSpec::lobulated(r_eq, count, height, width, seed)
        }
    } else {
        let ratios: [f64; 3] = core::array::from_fn(|_| libm::exp(rng.gen_range(libm::log(0.7)..libm::log(1.4))));
        ShapeSpec::ellipsoid(ratios.map(|a| a * r_eq), seed)
    }
    .with_jitter(jitter_mm);
    let target = 4.0 / 3.0 * PI * r_eq * r_eq * r_eq;
    let volume = raw.surface().volume(VOLUME_NODES);
    raw.scaled(libm::cbrt(target / volume))
}

/// Whether the default pipeline turns `grid` into one closed sphere-like
/// surface.
pub fn is_clean_genus_zero(grid: &VoxelGrid) -> bool {
    let config = PipelineConfig {
        spacing_mm: grid.spacing()[0],
        ..PipelineConfig::default()
    };
    match extract_morphomics_detailed(grid, &HistogramSpec::default(), &config) {
        Ok(m) => {
            let report = crate::mesh::validate(&m.mesh);
            report.is_valid_surface() && report.component_count == 1 && report.euler_characteristic == 2
        }
        Err(_) => false,
    }
}

/// One corpus case. Draws are redrawn until the mask fits the grid and
/// meshes to a single closed genus-0 surface.
pub fn make_case(malignant: bool, index: usize, config: &CorpusConfig, seed: u64) -> Result<CorpusCase, SynthError> {
    let class = if malignant { "malignant" } else { "benign" };
    let tag = format!("corpus/{class}");
    for attempt in 0..config.max_attempts {
        let case_seed = seed::derive_indexed(
            seed::derive_indexed(seed, &tag, index as u64),
            "attempt",
            attempt as u64,
        );
        let mut rng = seed::rng(case_seed);
        let r_eq = rng.gen_range(config.radius_mm.0..=config.radius_mm.1);
        let spec = draw_shape(malignant, r_eq, config.jitter_mm, &mut rng);
        let grid = match rasterize(&spec, [config.spacing_mm; 3], config.dims) {
            Ok(g) => g,
            Err(SynthError::ExceedsGrid { .. }) => continue,
            Err(e) => return Err(e),
        };
        if is_clean_genus_zero(&grid) {
            return Ok(CorpusCase {
                id: String::new(),
                label: malignant,
                spec,
                grid,
            });
        }
    }
    Err(SynthError::Exhausted(config.max_attempts))
}

/// Case order of a corpus: `(id, malignant, index within class)` with
/// benign cases first and ids `case_0000, case_0001, …`.
pub fn corpus_plan(n_benign: usize, n_malignant: usize) -> Vec<(String, bool, usize)> {
    let total = n_benign + n_malignant;
    let width = 4.max(format!("{total}").len());
    (0..n_benign)
        .map(|i| (false, i))
        .chain((0..n_malignant).map(|i| (true, i)))
        .enumerate()
        .map(|(k, (malignant, i))| (format!("case_{k:0width$}"), malignant, i))
        .collect()
}

/// Every case of [`corpus_plan`], generated in order.
pub fn make_corpus_with(
    n_benign: usize,
    n_malignant: usize,
    config: &CorpusConfig,
    seed: u64,
) -> Result<Vec<CorpusCase>, SynthError> {
    corpus_plan(n_benign, n_malignant)
        .into_iter()
        .map(|(id, malignant, i)| {
            let mut case = make_case(malignant, i, config, seed)?;
            case.id = id;
            Ok(case)
        })
        .collect()
}

pub fn make_corpus(n_benign: usize, n_malignant: usize, seed: u64) -> Result<Vec<CorpusCase>, SynthError> {
    make_corpus_with(n_benign, n_malignant, &CorpusConfig::default(), seed)
}
