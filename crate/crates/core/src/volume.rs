//! Binary mask volumes: resampling, barycenter and fixed-size patches.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

/// Default isotropic analysis spacing in mm.
pub const DEFAULT_SPACING_MM: f64 = 0.625;
/// Default cubic patch side in voxels.
pub const DEFAULT_PATCH_SIDE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VolumeError {
    #[error("dimensions must be positive, got {0:?}")]
    BadDims([usize; 3]),
    #[error("spacing must be finite and positive, got {0:?}")]
    BadSpacing([f64; 3]),
    #[error("data length {got} does not match dims product {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("mask has no occupied voxel")]
    EmptyMask,
    #[error("patch side must be positive")]
    BadPatchSide,
}

/// Binary occupancy on a regular grid, x-fastest layout.
///
/// `origin` is the world position (mm) of the center of voxel `(0, 0, 0)`;
/// voxel `(i, j, k)` is centered at `origin + (i, j, k) * spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    dims: [usize; 3],
    spacing: [f64; 3],
    origin: [f64; 3],
    data: Vec<bool>,
}

fn check_dims(dims: [usize; 3]) -> Result<usize, VolumeError> {
    if dims.contains(&0) {
        return Err(VolumeError::BadDims(dims));
    }
    dims[0]
        .checked_mul(dims[1])
        .and_then(|v| v.checked_mul(dims[2]))
        .ok_or(VolumeError::BadDims(dims))
}

fn check_spacing(spacing: [f64; 3]) -> Result<(), VolumeError> {
    if spacing.iter().all(|s| s.is_finite() && *s > 0.0) {
        Ok(())
    } else {
        Err(VolumeError::BadSpacing(spacing))
    }
}

impl VoxelGrid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3], data: Vec<bool>) -> Result<Self, VolumeError> {
        let expected = check_dims(dims)?;
        check_spacing(spacing)?;
        if data.len() != expected {
            return Err(VolumeError::DataLength {
                expected,
                got: data.len(),
            });
        }
        Ok(Self {
            dims,
            spacing,
            origin,
            data,
        })
    }

    /// All-empty grid.
    pub fn empty(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self, VolumeError> {
        let n = check_dims(dims)?;
        Self::new(dims, spacing, origin, vec![false; n])
    }

    /// Builds a grid from raw mask bytes; any nonzero value is occupied.
    pub fn from_bytes(
        dims: [usize; 3],
        spacing: [f64; 3],
        origin: [f64; 3],
        bytes: &[u8],
    ) -> Result<Self, VolumeError> {
        Self::new(dims, spacing, origin, bytes.iter().map(|&b| b > 0).collect())
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.data.iter().map(|&b| u8::from(b)).collect()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, z: usize) -> bool {
        self.data[self.index(x, y, z)]
    }

    /// Occupancy with everything outside the grid reading as empty.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64, z: i64) -> bool {
        if x < 0 || y < 0 || z < 0 {
            return false;
        }
        let (x, y, z) = (x as usize, y as usize, z as usize);
        if x >= self.dims[0] || y >= self.dims[1] || z >= self.dims[2] {
            return false;
        }
        self.get(x, y, z)
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, z: usize, value: bool) {
        let i = self.index(x, y, z);
        self.data[i] = value;
    }

    pub fn occupied_count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing[0] * self.spacing[1] * self.spacing[2]
    }

    /// Occupied volume in mm³.
    pub fn occupied_volume(&self) -> f64 {
        self.occupied_count() as f64 * self.voxel_volume()
    }

    /// World position of a (possibly fractional) voxel index.
    pub fn world(&self, index: [f64; 3]) -> [f64; 3] {
        [
            self.origin[0] + index[0] * self.spacing[0],
            self.origin[1] + index[1] * self.spacing[1],
            self.origin[2] + index[2] * self.spacing[2],
        ]
    }

    /// Iterates over the integer indices of occupied voxels.
    pub fn occupied(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let [nx, ny, _] = self.dims;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| [i % nx, (i / nx) % ny, i / (nx * ny)])
    }
}

/// Nearest input index for a continuous coordinate `u` (in input voxel
/// units); an exact midpoint goes to the lower index.
#[inline]
fn nearest_index(u: f64, n: usize) -> usize {
    let k = libm::ceil(u - 0.5);
    if k <= 0.0 {
        0
    } else if k >= (n - 1) as f64 {
        n - 1
    } else {
        k as usize
    }
}

/// Nearest-neighbor resampling to `target_spacing`.
///
/// The output covers the same physical extent as the input (voxel faces,
/// not centers), with `round(extent / target)` voxels per axis and at
/// least one.
pub fn resample_nearest(grid: &VoxelGrid, target_spacing: [f64; 3]) -> Result<VoxelGrid, VolumeError> {
    check_spacing(target_spacing)?;
    if grid.occupied_count() == 0 {
        return Err(VolumeError::EmptyMask);
    }
    let mut dims = [0usize; 3];
    let mut origin = [0.0; 3];
    for a in 0..3 {
        let extent = grid.dims[a] as f64 * grid.spacing[a];
        dims[a] = (libm::round(extent / target_spacing[a]) as usize).max(1);
        origin[a] = grid.origin[a] - 0.5 * grid.spacing[a] + 0.5 * target_spacing[a];
    }
    // Per-axis lookup tables: output index -> nearest input index.
    let maps: [Vec<usize>; 3] = core::array::from_fn(|a| {
        (0..dims[a])
            .map(|j| {
                let p = origin[a] + j as f64 * target_spacing[a];
                let u = (p - grid.origin[a]) / grid.spacing[a];
                nearest_index(u, grid.dims[a])
            })
            .collect()
    });
    let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
    for &z in &maps[2] {
        for &y in &maps[1] {
            for &x in &maps[0] {
                data.push(grid.get(x, y, z));
            }
        }
    }
    VoxelGrid::new(dims, target_spacing, origin, data)
}

/// Unweighted mean of the occupied voxel indices.
pub fn barycenter(grid: &VoxelGrid) -> Result<[f64; 3], VolumeError> {
    let mut sum = [0u64; 3];
    let mut count = 0u64;
    for idx in grid.occupied() {
        for a in 0..3 {
            sum[a] += idx[a] as u64;
        }
        count += 1;
    }
    if count == 0 {
        return Err(VolumeError::EmptyMask);
    }
    let c = count as f64;
    Ok([sum[0] as f64 / c, sum[1] as f64 / c, sum[2] as f64 / c])
}

/// Cubic `side³` patch centered on the rounded barycenter.
///
/// The barycenter voxel lands at index `side / 2` of the patch. Regions
/// outside the source grid are empty.
pub fn extract_patch(grid: &VoxelGrid, side: usize) -> Result<VoxelGrid, VolumeError> {
    if side == 0 {
        return Err(VolumeError::BadPatchSide);
    }
    let center = barycenter(grid)?;
    // libm::round rounds half away from zero.
    let start: [i64; 3] = core::array::from_fn(|a| libm::round(center[a]) as i64 - (side / 2) as i64);
    let mut data = Vec::with_capacity(side * side * side);
    for z in 0..side as i64 {
        for y in 0..side as i64 {
            for x in 0..side as i64 {
                data.push(grid.get_signed(start[0] + x, start[1] + y, start[2] + z));
            }
        }
    }
    let origin = grid.world([start[0] as f64, start[1] as f64, start[2] as f64]);
    VoxelGrid::new([side; 3], grid.spacing, origin, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(dims: [usize; 3], at: [usize; 3]) -> VoxelGrid {
        let mut g = VoxelGrid::empty(dims, [1.0; 3], [0.0; 3]).unwrap();
        g.set(at[0], at[1], at[2], true);
        g
    }

    fn ball(n: usize, radius_vox: f64, spacing: f64) -> VoxelGrid {
        let mut g = VoxelGrid::empty([n; 3], [spacing; 3], [0.0; 3]).unwrap();
        let c = (n as f64 - 1.0) / 2.0;
        for z in 0..n {
            for y in 0..n {
                for x in 0..n {
                    let d2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2);
                    if d2 < radius_vox * radius_vox {
                        g.set(x, y, z, true);
                    }
                }
            }
        }
        g
    }

    #[test]
    fn constructor_rejects_bad_inputs() {
        assert!(matches!(
            VoxelGrid::new([2, 2, 2], [1.0; 3], [0.0; 3], vec![false; 7]),
            Err(VolumeError::DataLength { expected: 8, got: 7 })
        ));
        assert!(VoxelGrid::empty([0, 2, 2], [1.0; 3], [0.0; 3]).is_err());
        assert!(VoxelGrid::empty([2, 2, 2], [1.0, 0.0, 1.0], [0.0; 3]).is_err());
    }

    #[test]
    fn nonzero_bytes_are_occupied() {
        let g = VoxelGrid::from_bytes([2, 1, 1], [1.0; 3], [0.0; 3], &[0, 255]).unwrap();
        assert_eq!(g.data(), &[false, true]);
    }

    #[test]
    fn resample_same_spacing_is_identity() {
        let g = ball(12, 4.0, 0.625);
        let r = resample_nearest(&g, [0.625; 3]).unwrap();
        assert_eq!(r, g);
    }

    /// Brute force: every output voxel center looks up the input voxel whose
    /// center is closest by explicit distance comparison.
    fn brute_nearest(grid: &VoxelGrid, target: [f64; 3], dims: [usize; 3], origin: [f64; 3]) -> Vec<bool> {
        let mut out = Vec::new();
        for z in 0..dims[2] {
            for y in 0..dims[1] {
                for x in 0..dims[0] {
                    let p = [
                        origin[0] + x as f64 * target[0],
                        origin[1] + y as f64 * target[1],
                        origin[2] + z as f64 * target[2],
                    ];
                    let mut idx = [0usize; 3];
                    for a in 0..3 {
                        let mut best = (f64::INFINITY, 0usize);
                        for k in 0..grid.dims()[a] {
                            let c = grid.origin()[a] + k as f64 * grid.spacing()[a];
                            let d = (p[a] - c).abs();
                            if d < best.0 - 1e-12 {
                                best = (d, k);
                            }
                        }
                        idx[a] = best.1;
                    }
                    out.push(grid.get(idx[0], idx[1], idx[2]));
                }
            }
        }
        out
    }

    #[test]
    fn resample_to_half_spacing_matches_brute_force() {
        let mut g = VoxelGrid::empty([10; 3], [1.0; 3], [0.0; 3]).unwrap();
        for v in [[1, 2, 3], [9, 9, 9], [0, 0, 0], [4, 5, 6], [5, 5, 6]] {
            g.set(v[0], v[1], v[2], true);
        }
        let r = resample_nearest(&g, [0.5; 3]).unwrap();
        assert_eq!(r.dims(), [20; 3]);
        assert_eq!(r.occupied_count(), 8 * g.occupied_count());
        let expected = brute_nearest(&g, [0.5; 3], r.dims(), r.origin());
        assert_eq!(r.data(), &expected[..]);
    }

    #[test]
    fn resample_anisotropic_matches_brute_force() {
        let mut g = VoxelGrid::empty([7, 5, 3], [0.7, 1.1, 2.5], [1.0, -2.0, 0.5]).unwrap();
        for (x, y, z) in [(0, 0, 0), (3, 2, 1), (6, 4, 2), (2, 1, 2), (5, 0, 1)] {
            g.set(x, y, z, true);
        }
        let target = [0.625; 3];
        let r = resample_nearest(&g, target).unwrap();
        let expected = brute_nearest(&g, target, r.dims(), r.origin());
        assert_eq!(r.data(), &expected[..]);
    }

    #[test]
    fn resample_preserves_ball_volume() {
        let g = ball(24, 8.0, 1.0);
        let r = resample_nearest(&g, [0.5; 3]).unwrap();
        // one voxel shell of the input resolution
        let shell = 4.0 * core::f64::consts::PI * 8.0 * 8.0 * 1.0;
        assert!((r.occupied_volume() - g.occupied_volume()).abs() <= shell);
    }

    #[test]
    fn resample_rejects_empty_and_bad_spacing() {
        let g = VoxelGrid::empty([3; 3], [1.0; 3], [0.0; 3]).unwrap();
        assert_eq!(resample_nearest(&g, [1.0; 3]), Err(VolumeError::EmptyMask));
        let g = single([3; 3], [1, 1, 1]);
        assert!(matches!(
            resample_nearest(&g, [0.0, 1.0, 1.0]),
            Err(VolumeError::BadSpacing(_))
        ));
    }

    #[test]
    fn resample_keeps_at_least_one_voxel() {
        let g = single([2, 2, 2], [0, 0, 0]);
        let r = resample_nearest(&g, [10.0; 3]).unwrap();
        assert_eq!(r.dims(), [1, 1, 1]);
    }

    #[test]
    fn barycenter_examples() {
        assert_eq!(barycenter(&single([8; 3], [3, 5, 7])).unwrap(), [3.0, 5.0, 7.0]);
        let mut g = single([4; 3], [0, 0, 0]);
        g.set(2, 0, 0, true);
        assert_eq!(barycenter(&g).unwrap(), [1.0, 0.0, 0.0]);
        let b = barycenter(&ball(21, 6.0, 1.0)).unwrap();
        for c in b {
            assert!((c - 10.0).abs() <= 0.5);
        }
        let empty = VoxelGrid::empty([2; 3], [1.0; 3], [0.0; 3]).unwrap();
        assert_eq!(barycenter(&empty), Err(VolumeError::EmptyMask));
    }

    #[test]
    fn patch_contains_centered_mask() {
        let mut g = VoxelGrid::empty([128; 3], [0.625; 3], [0.0; 3]).unwrap();
        for z in 60..68 {
            for y in 58..70 {
                for x in 62..66 {
                    g.set(x, y, z, true);
                }
            }
        }
        let p = extract_patch(&g, 64).unwrap();
        assert_eq!(p.dims(), [64; 3]);
        assert_eq!(p.occupied_count(), g.occupied_count());
    }

    #[test]
    fn patch_at_corner_is_zero_padded() {
        let mut g = VoxelGrid::empty([16; 3], [1.0; 3], [0.0; 3]).unwrap();
        for (x, y, z) in [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)] {
            g.set(x, y, z, true);
        }
        let p = extract_patch(&g, 8).unwrap();
        assert_eq!(p.occupied_count(), 4);
        // barycenter (0.25,0.25,0.25) rounds to 0; that voxel sits at index 4.
        assert!(p.get(4, 4, 4));
        assert_eq!(p.origin(), [-4.0, -4.0, -4.0]);
        assert!(!p.get(0, 0, 0));
    }

    #[test]
    fn patch_side_one_is_barycenter_voxel() {
        let mut g = single([6; 3], [1, 2, 3]);
        g.set(1, 2, 4, true);
        // barycenter z = 3.5 rounds half away from zero to 4
        let p = extract_patch(&g, 1).unwrap();
        assert_eq!(p.dims(), [1; 3]);
        assert!(p.get(0, 0, 0));
        assert_eq!(p.origin(), [1.0, 2.0, 4.0]);
        assert_eq!(extract_patch(&g, 0), Err(VolumeError::BadPatchSide));
    }

    proptest! {
        #[test]
        fn barycenter_translation_equivariant(
            pts in proptest::collection::vec((0usize..6, 0usize..6, 0usize..6), 1..12),
            shift in (0usize..4, 0usize..4, 0usize..4),
        ) {
            let mut a = VoxelGrid::empty([10; 3], [1.0; 3], [0.0; 3]).unwrap();
            let mut b = a.clone();
            for &(x, y, z) in &pts {
                a.set(x, y, z, true);
                b.set(x + shift.0, y + shift.1, z + shift.2, true);
            }
            let ca = barycenter(&a).unwrap();
            let cb = barycenter(&b).unwrap();
            let s = [shift.0 as f64, shift.1 as f64, shift.2 as f64];
            for k in 0..3 {
                prop_assert!((cb[k] - ca[k] - s[k]).abs() < 1e-9);
            }
        }

        #[test]
        fn patch_preserves_in_range_values(
            pts in proptest::collection::vec((0usize..9, 0usize..9, 0usize..9), 1..20),
            side in 1usize..12,
        ) {
            let mut g = VoxelGrid::empty([9; 3], [0.5, 1.0, 2.0], [3.0, 0.0, -1.0]).unwrap();
            for &(x, y, z) in &pts {
                g.set(x, y, z, true);
            }
            let p = extract_patch(&g, side).unwrap();
            let start: [i64; 3] = core::array::from_fn(|a| {
                libm::round((p.origin()[a] - g.origin()[a]) / g.spacing()[a]) as i64
            });
            for z in 0..side {
                for y in 0..side {
                    for x in 0..side {
                        let src = g.get_signed(start[0] + x as i64, start[1] + y as i64, start[2] + z as i64);
                        prop_assert_eq!(p.get(x, y, z), src);
                    }
                }
            }
        }
    }
}
