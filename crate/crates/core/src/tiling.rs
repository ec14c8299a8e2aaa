//! Sliding-window tiling and overlap fusion.
//!
//! Patch predictions are computed in parallel but always accumulated in
//! canonical tile order, so fused output does not depend on the number of
//! workers.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::predictor::PredictorSpec;
use crate::volume::{extract_patch, Grid, Index3, PatchSpec, Volume, VolumeKind};

/// Patches predicted per parallel batch, per worker. Bounds the number of
/// patch predictions held in memory before they are folded into the sums.
const BATCH_PER_WORKER: usize = 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingPlan {
    pub dims: Index3,
    pub patch_size: Index3,
    pub stride: Index3,
    /// Tiles in z-major, then y, then x ascending order.
    pub starts: Vec<PatchSpec>,
}

/// Tile starts along one axis: `0, t, 2t, ...` with the last start clamped
/// to `dim - p` and duplicates dropped.
pub fn axis_starts(dim: usize, patch: usize, stride: usize) -> Vec<usize> {
    let last = dim - patch;
    let mut starts: Vec<usize> = (0..)
        .map(|k| k * stride)
        .take_while(|&s| s < last)
        .collect();
    starts.push(last);
    starts
}

pub fn plan_tiling(dims: Index3, patch_size: Index3, stride: Index3) -> Result<TilingPlan> {
    if (0..3).any(|a| patch_size[a] == 0 || patch_size[a] > dims[a]) {
        return Err(Error::PatchTooLarge {
            size: patch_size,
            dims,
        });
    }
    if (0..3).any(|a| stride[a] == 0 || stride[a] > patch_size[a]) {
        return Err(Error::InvalidStride {
            stride,
            patch: patch_size,
        });
    }
    let [xs, ys, zs]: [Vec<usize>; 3] =
        core::array::from_fn(|a| axis_starts(dims[a], patch_size[a], stride[a]));
    let mut starts = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for &z in &zs {
        for &y in &ys {
            for &x in &xs {
                starts.push(PatchSpec::new([x, y, z], patch_size));
            }
        }
    }
    Ok(TilingPlan {
        dims,
        patch_size,
        stride,
        starts,
    })
}

/// Per-voxel blending weight applied to a patch prediction.
#[non_exhaustive]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WeightProfile {
    #[default]
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionAccumulator {
    grid: Grid,
    weighted_sum: Vec<f64>,
    weight: Vec<f64>,
}

impl FusionAccumulator {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            weighted_sum: alloc::vec![0.0; grid.len()],
            weight: alloc::vec![0.0; grid.len()],
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn weight(&self) -> &[f64] {
        &self.weight
    }

    pub fn is_covered(&self, linear: usize) -> bool {
        self.weight[linear] > 0.0
    }

    pub fn accumulate(&mut self, patch_prob: &Volume, loc: &PatchSpec, profile: WeightProfile) -> Result<()> {
        patch_prob.require_kind(VolumeKind::Probability)?;
        loc.validate(self.grid.dims)?;
        if patch_prob.dims() != loc.size {
            return Err(Error::DimsMismatch {
                left: patch_prob.dims(),
                right: loc.size,
            });
        }
        let values = patch_prob.data();
        match profile {
            WeightProfile::Uniform => loc.for_each_index(&self.grid, |local, parent| {
                self.weighted_sum[parent] += values[local];
                self.weight[parent] += 1.0;
            }),
        }
        Ok(())
    }

    /// Weighted mean where covered, 0 elsewhere.
    pub fn finalize(&self) -> Volume {
        let data = self
            .weighted_sum
            .iter()
            .zip(&self.weight)
            .map(|(&s, &w)| if w > 0.0 { (s / w).clamp(0.0, 1.0) } else { 0.0 })
            .collect();
        Volume::from_parts(self.grid, VolumeKind::Probability, data)
    }
}

/// Predicts every patch of `hu` at `locations` and fuses the predictions.
/// Predictions run in parallel; accumulation follows `locations` order.
pub fn predict_and_fuse(
    hu: &Volume,
    predictor: &PredictorSpec,
    locations: &[PatchSpec],
    exec: &Executor,
) -> Result<FusionAccumulator> {
    hu.require_kind(VolumeKind::Hu)?;
    predictor.check_target(hu.dims())?;
    let mut acc = FusionAccumulator::new(*hu.grid());
    for batch in locations.chunks(exec.workers() * BATCH_PER_WORKER) {
        let predictions = exec.map(batch, |loc| {
            extract_patch(hu, loc).and_then(|patch| predictor.predict(&patch, loc))
        });
        for (loc, prob) in batch.iter().zip(predictions) {
            acc.accumulate(&prob?, loc, WeightProfile::Uniform)?;
        }
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoarseRun {
    pub probability: Volume,
    pub plan: TilingPlan,
}

/// Coarse stage: tile the whole volume, predict each tile, fuse.
pub fn run_coarse(
    hu: &Volume,
    predictor: &PredictorSpec,
    patch_size: Index3,
    stride: Index3,
    exec: &Executor,
) -> Result<CoarseRun> {
    let plan = plan_tiling(hu.dims(), patch_size, stride)?;
    let acc = predict_and_fuse(hu, predictor, &plan.starts, exec)?;
    Ok(CoarseRun {
        probability: acc.finalize(),
        plan,
    })
}
