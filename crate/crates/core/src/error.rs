use crate::volume::{Index3, VolumeKind};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("volume dimensions must be positive, got {0:?}")]
    InvalidDims(Index3),
    #[error("voxel spacing must be finite and positive, got {0:?}")]
    InvalidSpacing([f64; 3]),
    #[error("data length {actual} does not match dims (expected {expected})")]
    DataLength { expected: usize, actual: usize },
    #[error("value {value} at voxel {index} violates the {kind:?} value domain")]
    ValueDomain {
        kind: VolumeKind,
        index: usize,
        value: f64,
    },
    #[error("expected a {expected:?} volume, got {actual:?}")]
    WrongKind {
        expected: VolumeKind,
        actual: VolumeKind,
    },
    #[error("volume has already been harmonized")]
    AlreadyHarmonized,
    #[error("patch (start {start:?}, size {size:?}) does not fit dims {dims:?}")]
    PatchOutOfBounds {
        start: Index3,
        size: Index3,
        dims: Index3,
    },
    #[error("voxel {index:?} lies outside dims {dims:?}")]
    IndexOutOfBounds { index: Index3, dims: Index3 },
    #[error("patch size {size:?} exceeds volume dims {dims:?}")]
    PatchTooLarge { size: Index3, dims: Index3 },
    #[error("stride {stride:?} must satisfy 1 <= stride <= patch {patch:?}")]
    InvalidStride { stride: Index3, patch: Index3 },
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimsMismatch { left: Index3, right: Index3 },
    #[error("spacing mismatch: {left:?} vs {right:?}")]
    SpacingMismatch { left: [f64; 3], right: [f64; 3] },
    #[error("invalid intensity window [{lo}, {hi}] with softness {softness}")]
    InvalidWindow { lo: f64, hi: f64, softness: f64 },
    #[error("noise standard deviation must be finite and >= 0, got {0}")]
    InvalidNoise(f64),
    #[error("volume is constant; no intensity band can be estimated")]
    ConstantVolume,
    #[error("mask is empty")]
    EmptyMask,
    #[error("component label {label} not in 1..={count}")]
    UnknownLabel { label: u32, count: u32 },
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("percentile must lie in (0, 100], got {0}")]
    InvalidPercentile(f64),
    #[error("cannot aggregate an empty set of rows")]
    EmptyAggregate,
    #[error("need at least k = {k} cases (and k >= 2), got {cases}")]
    TooFewCases { cases: usize, k: usize },
    #[error("duplicate case id {0:?}")]
    DuplicateCase(alloc::string::String),
    #[error("phantom tube does not fit inside the volume: {0}")]
    PhantomDoesNotFit(&'static str),
}
