//! Pseudo-centerline proposal and sparse patch-center sampling.
//!
//! Instead of skeletonizing the coarse mask, every slice perpendicular to
//! each of the three axes is split into 2D components; component centroids
//! are lifted back to 3D, rounded to voxels and merged. The dense point set
//! is then thinned greedily so that fine-stage patches do not pile up.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::morphology::{label_components_2d, Connectivity2d};
use crate::volume::{clamp_patch_at, Index3, Volume, VolumeKind};

#[derive(Clone, Debug, PartialEq)]
pub struct CenterSet {
    /// Distinct voxel coordinates in canonical order.
    pub points: Vec<Index3>,
    /// Minimum pairwise separation (voxels) the set was thinned to.
    pub d_min: f64,
}

impl CenterSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Sweep axis and the two in-slice axes `(u, v)`; `u` is the fastest.
const SWEEPS: [(usize, usize, usize); 3] = [(2, 0, 1), (1, 0, 2), (0, 1, 2)];

/// Rounded centroids of the 2D components of every slice perpendicular to
/// `axis`, in slice order. Points more than one voxel (Chebyshev) away from
/// any foreground voxel are dropped.
pub fn slice_centroids(mask: &Volume, axis: usize, connectivity: Connectivity2d) -> Result<Vec<Index3>> {
    mask.require_kind(VolumeKind::Label)?;
    let &(axis, u_axis, v_axis) = SWEEPS
        .iter()
        .find(|s| s.0 == axis)
        .ok_or(Error::InvalidConfig("sweep axis must be 0, 1 or 2"))?;
    let grid = *mask.grid();
    let dims = grid.dims;
    let data = mask.data();
    let (w, h) = (dims[u_axis], dims[v_axis]);
    let mut slice = alloc::vec![false; w * h];
    let mut points = Vec::new();
    for s in 0..dims[axis] {
        let mut any = false;
        for v in 0..h {
            for u in 0..w {
                let mut idx = [0; 3];
                idx[axis] = s;
                idx[u_axis] = u;
                idx[v_axis] = v;
                let fg = data[grid.index(idx)] != 0.0;
                slice[u + w * v] = fg;
                any |= fg;
            }
        }
        if !any {
            continue;
        }
        let labeling = label_components_2d(&slice, w, h, connectivity)?;
        for [cu, cv] in labeling.centroids() {
            let mut p = [0; 3];
            p[axis] = s;
            p[u_axis] = libm::round(cu) as usize;
            p[v_axis] = libm::round(cv) as usize;
            if near_foreground(mask, p) {
                points.push(p);
            }
        }
    }
    Ok(points)
}

/// [`slice_centroids`] along z, then y, then x, merged without duplicates.
pub fn pseudo_centerline(mask: &Volume, connectivity: Connectivity2d) -> Result<CenterSet> {
    mask.require_kind(VolumeKind::Label)?;
    if mask.count_nonzero() == 0 {
        return Err(Error::EmptyMask);
    }
    let grid = *mask.grid();
    let mut seen = alloc::vec![false; grid.len()];
    let mut points = Vec::new();
    for (axis, _, _) in SWEEPS {
        for p in slice_centroids(mask, axis, connectivity)? {
            let linear = grid.index(p);
            if !seen[linear] {
                seen[linear] = true;
                points.push(p);
            }
        }
    }
    Ok(CenterSet { points, d_min: 0.0 })
}

fn near_foreground(mask: &Volume, p: Index3) -> bool {
    let dims = mask.dims();
    let lo: [usize; 3] = core::array::from_fn(|a| p[a].saturating_sub(1));
    let hi: [usize; 3] = core::array::from_fn(|a| (p[a] + 1).min(dims[a] - 1));
    (lo[2]..=hi[2]).any(|z| {
        (lo[1]..=hi[1]).any(|y| (lo[0]..=hi[0]).any(|x| mask.get([x, y, z]) != 0.0))
    })
}

fn dist_sq(a: Index3, b: Index3) -> f64 {
    (0..3)
        .map(|i| {
            let d = a[i] as f64 - b[i] as f64;
            d * d
        })
        .sum()
}

/// Greedy thinning in canonical order: a point is kept iff it is at least
/// `d_min` (Euclidean, voxel units) from every point kept before it.
pub fn sparsify(dense: &CenterSet, d_min: f64) -> CenterSet {
    let d_min = d_min.max(0.0);
    let threshold = d_min * d_min;
    let mut kept: Vec<Index3> = Vec::new();
    for &p in &dense.points {
        if kept.iter().all(|&q| dist_sq(p, q) >= threshold) {
            kept.push(p);
        }
    }
    CenterSet { points: kept, d_min }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverageReport {
    /// Foreground voxels outside every center's patch footprint.
    pub uncovered: Vec<Index3>,
    pub foreground: usize,
}

impl CoverageReport {
    pub fn is_complete(&self) -> bool {
        self.uncovered.is_empty()
    }
}

/// Foreground voxels not reached by any fine patch placed (and border
/// clamped) at the given centers. Patch sizes larger than the volume are
/// cut down to the volume.
pub fn coverage_check(centers: &CenterSet, mask: &Volume, fine_patch: Index3) -> Result<CoverageReport> {
    mask.require_kind(VolumeKind::Label)?;
    let grid = *mask.grid();
    let size: Index3 = core::array::from_fn(|a| fine_patch[a].clamp(1, grid.dims[a]));
    let mut covered = alloc::vec![false; grid.len()];
    for &c in &centers.points {
        let patch = clamp_patch_at(c, size, grid.dims)?;
        patch.for_each_index(&grid, |_, parent| covered[parent] = true);
    }
    let mut uncovered = Vec::new();
    let mut foreground = 0;
    for (i, &v) in mask.data().iter().enumerate() {
        if v != 0.0 {
            foreground += 1;
            if !covered[i] {
                uncovered.push(grid.coord(i));
            }
        }
    }
    Ok(CoverageReport {
        uncovered,
        foreground,
    })
}
