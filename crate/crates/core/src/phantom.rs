//! Procedural vessel-tree phantoms with exact ground truth.
//!
//! A phantom is a union of capsules (all points within a radius of a line
//! segment): one trunk running the full z extent and `branch_count`
//! straight branches leaving it at seeded angles. Geometry and noise come
//! from separate seeded streams, so [`axis_points`] reproduces the exact
//! polyline used by [`generate`].

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::volume::{Grid, Index3, SourceTag, Volume, VolumeKind, SOURCE_OFFSET_HU};

#[derive(Clone, Debug, PartialEq)]
pub struct PhantomSpec {
    pub dims: Index3,
    /// Millimeters per voxel.
    pub spacing: [f64; 3],
    pub seed: u64,
    /// Trunk radius in voxels of the finest spacing.
    pub trunk_radius: f64,
    pub branch_count: usize,
    /// Branch radius as a fraction of the trunk radius, in `(0, 1]`.
    pub branch_radius_ratio: f64,
    /// Maximum lateral drift (voxels) of the trunk endpoints from the
    /// volume's central z line. 0 gives a trunk exactly parallel to z.
    pub trunk_drift: f64,
    pub lumen_hu: f64,
    pub background_hu: f64,
    pub noise_sd: f64,
    /// K and R styles store every intensity 1024 HU higher.
    pub source_style: SourceTag,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        Self {
            dims: [128, 128, 128],
            spacing: [1.0; 3],
            seed: 0,
            trunk_radius: 6.0,
            branch_count: 3,
            branch_radius_ratio: 0.5,
            trunk_drift: 0.0,
            lumen_hu: 276.0,
            background_hu: 40.0,
            noise_sd: 20.0,
            source_style: SourceTag::D,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Capsule {
    pub a: [f64; 3],
    pub b: [f64; 3],
    /// Radius in voxels of the finest spacing.
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Phantom {
    pub hu: Volume,
    pub mask: Volume,
    pub capsules: Vec<Capsule>,
}

const GEOMETRY_STREAM: u64 = 0;
const NOISE_STREAM: u64 = 1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<Grid> {
        let grid = Grid::new(self.dims, self.spacing, [0.0; 3])?;
        if !(self.trunk_radius.is_finite() && self.trunk_radius > 0.0) {
            return Err(Error::InvalidConfig("trunk_radius must be positive"));
        }
        if !(self.branch_radius_ratio > 0.0 && self.branch_radius_ratio <= 1.0) {
            return Err(Error::InvalidConfig("branch_radius_ratio must lie in (0, 1]"));
        }
        if !(self.trunk_drift.is_finite() && self.trunk_drift >= 0.0) {
            return Err(Error::InvalidConfig("trunk_drift must be >= 0"));
        }
        if !(self.noise_sd.is_finite() && self.noise_sd >= 0.0) {
            return Err(Error::InvalidNoise(self.noise_sd));
        }
        if !(self.lumen_hu.is_finite() && self.background_hu.is_finite()) || self.lumen_hu == self.background_hu {
            return Err(Error::InvalidConfig("lumen_hu and background_hu must be finite and distinct"));
        }
        for a in 0..2 {
            let center = (self.dims[a] / 2) as f64;
            let reach = self.trunk_radius + self.trunk_drift;
            if center - reach < 0.0 || center + reach > (self.dims[a] - 1) as f64 {
                return Err(Error::PhantomDoesNotFit("trunk exceeds the volume laterally"));
            }
        }
        Ok(grid)
    }

    /// Physical trunk radius in millimeters.
    fn unit(&self) -> f64 {
        self.spacing.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn capsules(&self) -> Result<Vec<Capsule>> {
        self.validate()?;
        let mut rng = rng_for(self.seed, GEOMETRY_STREAM);
        let [nx, ny, nz] = self.dims.map(|d| d as f64);
        let center = [(self.dims[0] / 2) as f64, (self.dims[1] / 2) as f64];
        let mut drift = || {
            if self.trunk_drift > 0.0 {
                rng.random_range(-self.trunk_drift..=self.trunk_drift)
            } else {
                0.0
            }
        };
        let trunk = Capsule {
            a: [center[0] + drift(), center[1] + drift(), 0.0],
            b: [center[0] + drift(), center[1] + drift(), nz - 1.0],
            radius: self.trunk_radius,
        };
        let mut capsules = alloc::vec![trunk];
        let branch_radius = self.trunk_radius * self.branch_radius_ratio;
        let margin = branch_radius + 1.0;
        let upper = [nx - 1.0 - margin, ny - 1.0 - margin, nz - 1.0 - margin];
        for _ in 0..self.branch_count {
            let t: f64 = rng.random_range(0.25..0.75);
            let azimuth: f64 = rng.random_range(0.0..2.0 * PI);
            let elevation: f64 = rng.random_range(-0.5..0.5);
            let wanted = rng.random_range(0.3..0.45) * nx.min(ny);
            let start: [f64; 3] = core::array::from_fn(|a| trunk.a[a] + t * (trunk.b[a] - trunk.a[a]));
            let dir = [
                libm::cos(azimuth) * libm::cos(elevation),
                libm::sin(azimuth) * libm::cos(elevation),
                libm::sin(elevation),
            ];
            // longest run from `start` along `dir` that keeps the end inside the margin box
            let room = (0..3).fold(f64::INFINITY, |room, a| {
                let limit = if dir[a] > 0.0 {
                    (upper[a] - start[a]) / dir[a]
                } else if dir[a] < 0.0 {
                    (margin - start[a]) / dir[a]
                } else {
                    f64::INFINITY
                };
                room.min(limit)
            });
            let length = wanted.min(room.max(0.0));
            capsules.push(Capsule {
                a: start,
                b: core::array::from_fn(|a| start[a] + length * dir[a]),
                radius: branch_radius,
            });
        }
        Ok(capsules)
    }

    /// Physical distance (mm) from voxel center `p` to the capsule axis.
    pub fn distance_to_axis(&self, c: &Capsule, p: [f64; 3]) -> f64 {
        segment_distance(c.a, c.b, p, self.spacing)
    }

    /// Whether voxel `p` lies inside capsule `c`.
    pub fn inside(&self, c: &Capsule, p: [f64; 3]) -> bool {
        self.distance_to_axis(c, p) <= c.radius * self.unit()
    }
}

fn segment_distance(a: [f64; 3], b: [f64; 3], p: [f64; 3], spacing: [f64; 3]) -> f64 {
    let ab: [f64; 3] = core::array::from_fn(|i| (b[i] - a[i]) * spacing[i]);
    let ap: [f64; 3] = core::array::from_fn(|i| (p[i] - a[i]) * spacing[i]);
    let len2: f64 = ab.iter().map(|v| v * v).sum();
    let t = if len2 > 0.0 {
        (ab.iter().zip(&ap).map(|(u, v)| u * v).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let d2: f64 = (0..3).map(|i| (ap[i] - t * ab[i]) * (ap[i] - t * ab[i])).sum();
    libm::sqrt(d2)
}

/// Polyline vertices of the phantom: trunk endpoints followed by the two
/// endpoints of every branch.
pub fn axis_points(spec: &PhantomSpec) -> Result<Vec<[f64; 3]>> {
    Ok(spec.capsules()?.iter().flat_map(|c| [c.a, c.b]).collect())
}

/// Renders the HU volume and ground-truth mask. HU values are integers:
/// lumen or background intensity plus rounded Gaussian noise, shifted by
/// +1024 for K/R source styles.
pub fn generate(spec: &PhantomSpec) -> Result<Phantom> {
    let grid = spec.validate()?;
    let capsules = spec.capsules()?;
    let unit = spec.unit();
    // voxel-space bounding boxes to skip far capsules cheaply
    let boxes: Vec<([f64; 3], [f64; 3])> = capsules
        .iter()
        .map(|c| {
            let pad: [f64; 3] = core::array::from_fn(|i| c.radius * unit / spec.spacing[i]);
            (
                core::array::from_fn(|i| c.a[i].min(c.b[i]) - pad[i]),
                core::array::from_fn(|i| c.a[i].max(c.b[i]) + pad[i]),
            )
        })
        .collect();
    let mask = Volume::mask_from_fn(grid, |idx| {
        let p = idx.map(|v| v as f64);
        capsules.iter().zip(&boxes).any(|(c, (lo, hi))| {
            (0..3).all(|i| p[i] >= lo[i] && p[i] <= hi[i]) && spec.inside(c, p)
        })
    });

    let offset = if spec.source_style.is_shifted() { SOURCE_OFFSET_HU } else { 0.0 };
    let mut rng = rng_for(spec.seed, NOISE_STREAM);
    let normal = Normal::new(0.0, spec.noise_sd).map_err(|_| Error::InvalidNoise(spec.noise_sd))?;
    let data: Vec<f64> = mask
        .data()
        .iter()
        .map(|&m| {
            let base = if m != 0.0 { spec.lumen_hu } else { spec.background_hu };
            let noise = if spec.noise_sd > 0.0 { normal.sample(&mut rng) } else { 0.0 };
            libm::round(base + noise) + offset
        })
        .collect();
    let hu = Volume::new(grid, VolumeKind::Hu, data)?;
    Ok(Phantom { hu, mask, capsules })
}
