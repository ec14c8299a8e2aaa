//! Two-stage volumetric segmentation engine for aortic vessel trees.
//!
//! The engine runs a coarse sliding-window stage over the whole scan, turns
//! the coarse mask into a pseudo-centerline (2D component centroids collected
//! along the three orthogonal slice directions), samples sparse patch centers
//! along it and refines the segmentation with a second, smaller-patch
//! predictor. The neural predictors are abstracted behind [`PredictorSpec`].
//!
//! The crate is `no_std` + `alloc`. The default `std` feature enables
//! multi-threaded patch prediction and stage timings; outputs are
//! bit-identical with or without it.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod centerline;
pub mod error;
pub mod exec;
pub mod metrics;
pub mod morphology;
pub mod phantom;
pub mod pipeline;
pub mod predictor;
pub mod tiling;
pub mod volume;

pub use centerline::{coverage_check, pseudo_centerline, slice_centroids, sparsify, CenterSet, CoverageReport};
pub use error::{Error, Result};
pub use exec::Executor;
pub use metrics::{
    aggregate_folds, confusion, counting_metrics, evaluate_case, hausdorff, make_folds, Confusion,
    CountingMetrics, FoldSplit, MetricsRow,
};
pub use morphology::{
    boundary_voxels, label_components_2d, label_components_3d, ComponentLabeling,
    ComponentLabeling2d, Connectivity2d, Connectivity3d,
};
pub use phantom::{PhantomSpec, Phantom};
pub use pipeline::{binarize, PipelineConfig, PipelineError, PipelineResult};
pub use predictor::{suggest_window, PredictorSpec, WindowBand};
pub use tiling::{plan_tiling, FusionAccumulator, TilingPlan, WeightProfile};
pub use volume::{
    clamp_patch_at, extract_patch, harmonize, Grid, Index3, PatchSpec, SourceTag, Volume,
    VolumeKind,
};
