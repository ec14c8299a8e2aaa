//! End-to-end two-stage segmentation.
//!
//! harmonize → coarse sliding window → binarize → pseudo-centerline →
//! sparsify → fine patches at the sparse centers → fuse → binarize →
//! optional small-component removal.
//!
//! Within fine-patch coverage the final probability is the fine-stage
//! average alone; outside it the coarse probability is kept.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::centerline::{pseudo_centerline, sparsify, CenterSet};
use crate::error::{Error, Result};
use crate::exec::Executor;
use crate::morphology::{label_components_3d, Connectivity2d, Connectivity3d};
use crate::predictor::PredictorSpec;
use crate::tiling::{predict_and_fuse, run_coarse, TilingPlan};
use crate::volume::{clamp_patch_at, harmonize, Index3, PatchSpec, SourceTag, Volume, VolumeKind};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub coarse_patch: Index3,
    pub coarse_stride: Index3,
    pub fine_patch: Index3,
    pub coarse_threshold: f64,
    pub fine_threshold: f64,
    /// Minimum center separation in voxels; `None` means
    /// `floor(min(fine_patch) / 2)`.
    pub d_min: Option<f64>,
    pub min_component_size: usize,
    pub coarse_predictor: PredictorSpec,
    pub fine_predictor: PredictorSpec,
    pub source_tag: SourceTag,
    pub connectivity_2d: Connectivity2d,
    pub connectivity_3d: Connectivity3d,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let window = PredictorSpec::window(150.0, 600.0, 0.0).expect("valid default window");
        Self {
            coarse_patch: [128; 3],
            coarse_stride: [96; 3],
            fine_patch: [64; 3],
            coarse_threshold: 0.5,
            fine_threshold: 0.5,
            d_min: None,
            min_component_size: 0,
            coarse_predictor: window.clone(),
            fine_predictor: window,
            source_tag: SourceTag::Unknown,
            connectivity_2d: Connectivity2d::Eight,
            connectivity_3d: Connectivity3d::TwentySix,
        }
    }
}

impl PipelineConfig {
    pub fn effective_d_min(&self) -> f64 {
        self.d_min
            .unwrap_or_else(|| (self.fine_patch.iter().copied().min().unwrap_or(0) / 2) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let triples = [self.coarse_patch, self.coarse_stride, self.fine_patch];
        if triples.iter().flatten().any(|&v| v == 0) {
            return Err(Error::InvalidConfig("patch sizes and strides must be >= 1"));
        }
        if (0..3).any(|a| self.coarse_stride[a] > self.coarse_patch[a]) {
            return Err(Error::InvalidConfig("coarse_stride must not exceed coarse_patch"));
        }
        if (0..3).any(|a| self.fine_patch[a] > self.coarse_patch[a]) {
            return Err(Error::InvalidConfig("fine_patch must not exceed coarse_patch"));
        }
        let open_unit = |t: f64| t > 0.0 && t < 1.0;
        if !open_unit(self.coarse_threshold) || !open_unit(self.fine_threshold) {
            return Err(Error::InvalidConfig("thresholds must lie in (0, 1)"));
        }
        if let Some(d) = self.d_min {
            if !(d.is_finite() && d >= 0.0) {
                return Err(Error::InvalidConfig("d_min must be finite and >= 0"));
            }
        }
        Ok(())
    }
}

/// Patch size cut down to the volume on any axis where it is larger.
pub fn fit_patch(size: Index3, dims: Index3) -> Index3 {
    core::array::from_fn(|a| size[a].min(dims[a]))
}

/// Wall-clock milliseconds per stage (zero without the `std` feature).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub harmonize_ms: f64,
    pub coarse_ms: f64,
    pub centerline_ms: f64,
    /// Fine prediction, fusion, binarization and component filtering.
    pub fine_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoarseOutput {
    pub probability: Volume,
    pub mask: Volume,
    pub plan: TilingPlan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CenterProposal {
    pub dense: CenterSet,
    pub sparse: CenterSet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RefineOutput {
    /// Fine-stage average; 0 outside fine coverage.
    pub fine_probability: Volume,
    /// Fine average where covered, coarse probability elsewhere.
    pub final_probability: Volume,
    pub final_mask: Volume,
    pub fine_patches: Vec<PatchSpec>,
    pub final_components: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineResult {
    pub coarse_prob: Volume,
    pub coarse_mask: Volume,
    pub fine_prob: Volume,
    pub final_prob: Volume,
    pub final_mask: Volume,
    pub dense_centers: CenterSet,
    pub centers: CenterSet,
    pub tiles: usize,
    pub fine_patches: usize,
    pub final_components: u32,
    pub timings: StageTimings,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Engine(#[from] Error),
    /// The coarse stage found no foreground, so no fine patches can be
    /// placed. Carries the coarse result for inspection.
    #[error("coarse stage produced an empty mask; no vessel proposal")]
    NoProposal(Box<CoarseOutput>),
}

/// Label 1 iff probability ≥ threshold.
pub fn binarize(p: &Volume, threshold: f64) -> Result<Volume> {
    p.require_kind(VolumeKind::Probability)?;
    let data = p.data().iter().map(|&v| if v >= threshold { 1.0 } else { 0.0 }).collect();
    Ok(Volume::from_parts(*p.grid(), VolumeKind::Label, data))
}

/// Coarse stage on an already harmonized HU volume.
pub fn coarse_stage(hu: &Volume, cfg: &PipelineConfig, exec: &Executor) -> Result<CoarseOutput> {
    cfg.validate()?;
    let dims = hu.dims();
    let patch = fit_patch(cfg.coarse_patch, dims);
    let stride = core::array::from_fn(|a| cfg.coarse_stride[a].min(patch[a]));
    let run = run_coarse(hu, &cfg.coarse_predictor, patch, stride, exec)?;
    let mask = binarize(&run.probability, cfg.coarse_threshold)?;
    Ok(CoarseOutput {
        probability: run.probability,
        mask,
        plan: run.plan,
    })
}

/// Pseudo-centerline of the coarse mask, thinned to `cfg.effective_d_min()`.
pub fn propose_centers(coarse_mask: &Volume, cfg: &PipelineConfig) -> Result<CenterProposal> {
    let dense = pseudo_centerline(coarse_mask, cfg.connectivity_2d)?;
    let sparse = sparsify(&dense, cfg.effective_d_min());
    Ok(CenterProposal { dense, sparse })
}

/// Fine stage and fusion with the coarse probability.
pub fn refine_stage(
    hu: &Volume,
    coarse_probability: &Volume,
    centers: &CenterSet,
    cfg: &PipelineConfig,
    exec: &Executor,
) -> Result<RefineOutput> {
    cfg.validate()?;
    coarse_probability.require_kind(VolumeKind::Probability)?;
    hu.require_same_dims(coarse_probability)?;
    let dims = hu.dims();
    let size = fit_patch(cfg.fine_patch, dims);
    let fine_patches = centers
        .points
        .iter()
        .map(|&c| clamp_patch_at(c, size, dims))
        .collect::<Result<Vec<_>>>()?;
    let acc = predict_and_fuse(hu, &cfg.fine_predictor, &fine_patches, exec)?;
    let fine_probability = acc.finalize();
    let final_data = fine_probability
        .data()
        .iter()
        .zip(coarse_probability.data())
        .enumerate()
        .map(|(i, (&fine, &coarse))| if acc.is_covered(i) { fine } else { coarse })
        .collect();
    let final_probability = Volume::from_parts(*hu.grid(), VolumeKind::Probability, final_data);
    let binary = binarize(&final_probability, cfg.fine_threshold)?;
    let labeling = label_components_3d(&binary, cfg.connectivity_3d)?;
    let (final_mask, final_components) = if cfg.min_component_size > 0 {
        let kept = labeling.filter_components(cfg.min_component_size);
        let count = labeling.sizes.iter().filter(|&&s| s >= cfg.min_component_size).count() as u32;
        (kept, count)
    } else {
        (binary, labeling.count())
    };
    Ok(RefineOutput {
        fine_probability,
        final_probability,
        final_mask,
        fine_patches,
        final_components,
    })
}

#[cfg(feature = "std")]
struct Stopwatch(std::time::Instant);

#[cfg(feature = "std")]
impl Stopwatch {
    fn start() -> Self {
        Self(std::time::Instant::now())
    }

    fn lap(&mut self) -> f64 {
        let now = std::time::Instant::now();
        let ms = now.duration_since(self.0).as_secs_f64() * 1e3;
        self.0 = now;
        ms
    }
}

#[cfg(not(feature = "std"))]
struct Stopwatch;

#[cfg(not(feature = "std"))]
impl Stopwatch {
    fn start() -> Self {
        Stopwatch
    }

    fn lap(&mut self) -> f64 {
        0.0
    }
}

/// Runs the whole pipeline on a raw HU volume.
pub fn run(raw: &Volume, cfg: &PipelineConfig, exec: &Executor) -> Result<PipelineResult, PipelineError> {
    cfg.validate()?;
    let mut timings = StageTimings::default();
    let mut clock = Stopwatch::start();

    let hu = harmonize(raw, cfg.source_tag)?;
    timings.harmonize_ms = clock.lap();

    let coarse = coarse_stage(&hu, cfg, exec)?;
    timings.coarse_ms = clock.lap();
    if coarse.mask.count_nonzero() == 0 {
        return Err(PipelineError::NoProposal(Box::new(coarse)));
    }

    let proposal = propose_centers(&coarse.mask, cfg)?;
    timings.centerline_ms = clock.lap();

    let refined = refine_stage(&hu, &coarse.probability, &proposal.sparse, cfg, exec)?;
    timings.fine_ms = clock.lap();

    Ok(PipelineResult {
        tiles: coarse.plan.starts.len(),
        fine_patches: refined.fine_patches.len(),
        final_components: refined.final_components,
        coarse_prob: coarse.probability,
        coarse_mask: coarse.mask,
        fine_prob: refined.fine_probability,
        final_prob: refined.final_probability,
        final_mask: refined.final_mask,
        dense_centers: proposal.dense,
        centers: proposal.sparse,
        timings,
    })
}
