//! Volumetric data model: grids, voxel addressing, patches and intensity
//! harmonization.
//!
//! Voxels are stored x-fastest: the linear index of `(x, y, z)` is
//! `x + nx * (y + ny * z)`. Every module in the crate shares this order.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Voxel index or voxel count triple, ordered `(x, y, z)`.
pub type Index3 = [usize; 3];

/// Intensity offset between the raw K/R source convention and the D one.
pub const SOURCE_OFFSET_HU: f64 = 1024.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VolumeKind {
    /// Hounsfield units (any finite value).
    Hu,
    /// Per-voxel foreground probability in `[0, 1]`.
    Probability,
    /// Binary mask, values in `{0, 1}`.
    Label,
}

/// Acquisition source of a scan, which decides whether it needs the
/// `-1024` intensity shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum SourceTag {
    K,
    R,
    D,
    #[default]
    Unknown,
}

impl SourceTag {
    /// Whether raw intensities from this source sit 1024 HU above the
    /// harmonized convention.
    pub fn is_shifted(self) -> bool {
        matches!(self, SourceTag::K | SourceTag::R)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SourceTag::K => "K",
            SourceTag::R => "R",
            SourceTag::D => "D",
            SourceTag::Unknown => "Unknown",
        }
    }
}

impl core::str::FromStr for SourceTag {
    type Err = ();

    fn from_str(s: &str) -> core::result::Result<Self, ()> {
        match s {
            "K" | "k" => Ok(SourceTag::K),
            "R" | "r" => Ok(SourceTag::R),
            "D" | "d" => Ok(SourceTag::D),
            "Unknown" | "unknown" => Ok(SourceTag::Unknown),
            _ => Err(()),
        }
    }
}

impl core::fmt::Display for SourceTag {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Geometry of a voxel grid: size, spacing (mm per voxel) and origin (mm).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub dims: Index3,
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl Grid {
    pub fn new(dims: Index3, spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidDims(dims));
        }
        if dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .is_none()
        {
            return Err(Error::InvalidDims(dims));
        }
        if spacing.iter().any(|&s| !(s.is_finite() && s > 0.0)) {
            return Err(Error::InvalidSpacing(spacing));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidSpacing(origin));
        }
        Ok(Self {
            dims,
            spacing,
            origin,
        })
    }

    /// Unit spacing, zero origin.
    pub fn with_dims(dims: Index3) -> Result<Self> {
        Self::new(dims, [1.0; 3], [0.0; 3])
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, [x, y, z]: Index3) -> usize {
        x + self.dims[0] * (y + self.dims[1] * z)
    }

    #[inline]
    pub fn coord(&self, linear: usize) -> Index3 {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [linear % nx, (linear / nx) % ny, linear / (nx * ny)]
    }

    pub fn contains(&self, idx: Index3) -> bool {
        idx.iter().zip(self.dims.iter()).all(|(&i, &d)| i < d)
    }
}

/// A 3D scalar grid with geometry and an intensity-kind tag.
///
/// Values are held as `f64` regardless of kind. A `Volume` is immutable once
/// built; every construction path validates the kind's value domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    grid: Grid,
    kind: VolumeKind,
    data: Vec<f64>,
    harmonized: bool,
}

fn check_domain(kind: VolumeKind, data: &[f64]) -> Result<()> {
    let bad = match kind {
        VolumeKind::Hu => data.iter().position(|v| !v.is_finite()),
        VolumeKind::Probability => data.iter().position(|v| !(0.0..=1.0).contains(v)),
        VolumeKind::Label => data.iter().position(|&v| v != 0.0 && v != 1.0),
    };
    match bad {
        Some(index) => Err(Error::ValueDomain {
            kind,
            index,
            value: data[index],
        }),
        None => Ok(()),
    }
}

impl Volume {
    pub fn new(grid: Grid, kind: VolumeKind, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::DataLength {
                expected: grid.len(),
                actual: data.len(),
            });
        }
        check_domain(kind, &data)?;
        Ok(Self {
            grid,
            kind,
            data,
            harmonized: false,
        })
    }

    /// Caller guarantees length and value domain.
    pub(crate) fn from_parts(grid: Grid, kind: VolumeKind, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        debug_assert!(check_domain(kind, &data).is_ok());
        Self {
            grid,
            kind,
            data,
            harmonized: false,
        }
    }

    pub fn filled(grid: Grid, kind: VolumeKind, value: f64) -> Result<Self> {
        Self::new(grid, kind, alloc::vec![value; grid.len()])
    }

    pub fn from_fn(grid: Grid, kind: VolumeKind, mut f: impl FnMut(Index3) -> f64) -> Result<Self> {
        let data = (0..grid.len()).map(|i| f(grid.coord(i))).collect();
        Self::new(grid, kind, data)
    }

    /// Builds a label mask from a boolean predicate.
    pub fn mask_from_fn(grid: Grid, mut f: impl FnMut(Index3) -> bool) -> Self {
        let data = (0..grid.len())
            .map(|i| if f(grid.coord(i)) { 1.0 } else { 0.0 })
            .collect();
        Self::from_parts(grid, VolumeKind::Label, data)
    }

    /// Re-tags the volume, validating the new kind's value domain.
    pub fn with_kind(self, kind: VolumeKind) -> Result<Self> {
        check_domain(kind, &self.data)?;
        Ok(Self { kind, ..self })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dims(&self) -> Index3 {
        self.grid.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.grid.spacing
    }

    pub fn origin(&self) -> [f64; 3] {
        self.grid.origin
    }

    pub fn kind(&self) -> VolumeKind {
        self.kind
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// True once [`harmonize`] has been applied.
    pub fn is_harmonized(&self) -> bool {
        self.harmonized
    }

    #[inline]
    pub fn get(&self, idx: Index3) -> f64 {
        self.data[self.grid.index(idx)]
    }

    /// Number of voxels with a nonzero value.
    pub fn count_nonzero(&self) -> usize {
        self.data.iter().filter(|&&v| v != 0.0).count()
    }

    pub(crate) fn require_kind(&self, expected: VolumeKind) -> Result<()> {
        if self.kind == expected {
            Ok(())
        } else {
            Err(Error::WrongKind {
                expected,
                actual: self.kind,
            })
        }
    }

    pub(crate) fn require_same_dims(&self, other: &Volume) -> Result<()> {
        if self.dims() == other.dims() {
            Ok(())
        } else {
            Err(Error::DimsMismatch {
                left: self.dims(),
                right: other.dims(),
            })
        }
    }
}

/// Axis-aligned subgrid of a volume.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PatchSpec {
    pub start: Index3,
    pub size: Index3,
}

impl PatchSpec {
    pub fn new(start: Index3, size: Index3) -> Self {
        Self { start, size }
    }

    /// Patch covering a whole grid of the given dims.
    pub fn full(dims: Index3) -> Self {
        Self {
            start: [0; 3],
            size: dims,
        }
    }

    pub fn len(&self) -> usize {
        self.size.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exclusive end corner.
    pub fn end(&self) -> Index3 {
        [
            self.start[0] + self.size[0],
            self.start[1] + self.size[1],
            self.start[2] + self.size[2],
        ]
    }

    pub fn contains(&self, idx: Index3) -> bool {
        (0..3).all(|a| idx[a] >= self.start[a] && idx[a] < self.start[a] + self.size[a])
    }

    pub fn validate(&self, dims: Index3) -> Result<()> {
        let fits = (0..3).all(|a| {
            self.size[a] > 0
                && self.start[a]
                    .checked_add(self.size[a])
                    .is_some_and(|end| end <= dims[a])
        });
        if fits {
            Ok(())
        } else {
            Err(Error::PatchOutOfBounds {
                start: self.start,
                size: self.size,
                dims,
            })
        }
    }

    /// Visits the parent-grid linear index of every voxel in the patch, in
    /// x-fastest order, together with the voxel's position within the patch.
    pub(crate) fn for_each_index(&self, parent: &Grid, mut f: impl FnMut(usize, usize)) {
        let [sx, sy, sz] = self.start;
        let [px, py, pz] = self.size;
        let mut local = 0;
        for z in sz..sz + pz {
            for y in sy..sy + py {
                let row = parent.index([sx, y, z]);
                for x in 0..px {
                    f(local, row + x);
                    local += 1;
                }
            }
        }
    }
}

/// Applies the source-dependent intensity shift: K and R scans have 1024
/// subtracted, D and Unknown pass through. Only one application is allowed
/// per volume.
pub fn harmonize(v: &Volume, tag: SourceTag) -> Result<Volume> {
    v.require_kind(VolumeKind::Hu)?;
    if v.harmonized {
        return Err(Error::AlreadyHarmonized);
    }
    let data = if tag.is_shifted() {
        v.data.iter().map(|x| x - SOURCE_OFFSET_HU).collect()
    } else {
        v.data.clone()
    };
    Ok(Volume {
        grid: v.grid,
        kind: VolumeKind::Hu,
        data,
        harmonized: true,
    })
}

/// Outcome of [`suggest_harmonization`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonizationAdvice {
    /// Median of the intensities at or above the 99th percentile.
    pub upper_median: f64,
    /// Whether the scan looks like it follows the shifted K/R convention.
    pub suggest_shift: bool,
}

/// Advisory check for the shifted intensity convention: the median of the
/// top-percentile intensities exceeds 500 HU. Never applied automatically.
pub fn suggest_harmonization(v: &Volume) -> Result<HarmonizationAdvice> {
    v.require_kind(VolumeKind::Hu)?;
    let mut sorted = v.data.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let rank = nearest_rank(99.0, n);
    let upper = &sorted[rank - 1..];
    let upper_median = upper[(upper.len() - 1) / 2];
    Ok(HarmonizationAdvice {
        upper_median,
        suggest_shift: upper_median > 500.0,
    })
}

/// 1-based nearest-rank index for percentile `p` over `n` sorted values.
pub(crate) fn nearest_rank(p: f64, n: usize) -> usize {
    let rank = libm::ceil(p / 100.0 * n as f64) as usize;
    rank.clamp(1, n)
}

/// Copies the subgrid addressed by `p`. Spacing and kind are kept; the
/// origin moves by `start * spacing`.
pub fn extract_patch(v: &Volume, p: &PatchSpec) -> Result<Volume> {
    p.validate(v.dims())?;
    let mut data = alloc::vec![0.0; p.len()];
    p.for_each_index(&v.grid, |local, parent| data[local] = v.data[parent]);
    let spacing = v.spacing();
    let origin = core::array::from_fn(|a| v.grid.origin[a] + p.start[a] as f64 * spacing[a]);
    Ok(Volume {
        grid: Grid {
            dims: p.size,
            spacing,
            origin,
        },
        kind: v.kind,
        data,
        harmonized: v.harmonized,
    })
}

/// Places a patch of `size` centered on `center` (start = center - size/2)
/// and clamps it per axis so that it lies inside `dims`.
pub fn clamp_patch_at(center: Index3, size: Index3, dims: Index3) -> Result<PatchSpec> {
    if (0..3).any(|a| size[a] == 0 || size[a] > dims[a]) {
        return Err(Error::PatchTooLarge { size, dims });
    }
    if (0..3).any(|a| center[a] >= dims[a]) {
        return Err(Error::IndexOutOfBounds {
            index: center,
            dims,
        });
    }
    let start = core::array::from_fn(|a| {
        center[a]
            .saturating_sub(size[a] / 2)
            .min(dims[a] - size[a])
    });
    Ok(PatchSpec { start, size })
}
