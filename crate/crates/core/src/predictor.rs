//! Pluggable voxel classifiers standing in for the trained segmentation
//! networks of both stages.
//!
//! * [`PredictorSpec::Window`] thresholds harmonized HU into a soft band.
//! * [`PredictorSpec::ProbFile`] replays an externally computed probability
//!   map, so outputs of any real model can be plugged in.
//! * [`PredictorSpec::Oracle`] returns a reference mask with optional seeded
//!   Gaussian noise.

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::volume::{nearest_rank, Index3, PatchSpec, Volume, VolumeKind};

/// HU band `[lo, hi]` with linear ramps of width `softness` outside each edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowBand {
    pub lo: f64,
    pub hi: f64,
    pub softness: f64,
}

impl WindowBand {
    pub fn new(lo: f64, hi: f64, softness: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi && softness.is_finite() && softness >= 0.0) {
            return Err(Error::InvalidWindow { lo, hi, softness });
        }
        Ok(Self { lo, hi, softness })
    }

    /// Pointwise response in `[0, 1]`.
    #[inline]
    pub fn response(&self, hu: f64) -> f64 {
        if hu >= self.lo && hu <= self.hi {
            1.0
        } else if self.softness == 0.0 {
            0.0
        } else if hu < self.lo {
            ((hu - (self.lo - self.softness)) / self.softness).clamp(0.0, 1.0)
        } else {
            (((self.hi + self.softness) - hu) / self.softness).clamp(0.0, 1.0)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PredictorSpec {
    Window(WindowBand),
    /// Stored probabilities covering the whole target volume.
    ProbFile(Arc<Volume>),
    Oracle {
        reference: Arc<Volume>,
        noise_sd: f64,
        seed: u64,
    },
}

impl PredictorSpec {
    pub fn window(lo: f64, hi: f64, softness: f64) -> Result<Self> {
        WindowBand::new(lo, hi, softness).map(PredictorSpec::Window)
    }

    pub fn prob_file(probabilities: Arc<Volume>) -> Result<Self> {
        probabilities.require_kind(VolumeKind::Probability)?;
        Ok(PredictorSpec::ProbFile(probabilities))
    }

    pub fn oracle(reference: Arc<Volume>, noise_sd: f64, seed: u64) -> Result<Self> {
        reference.require_kind(VolumeKind::Label)?;
        if !(noise_sd.is_finite() && noise_sd >= 0.0) {
            return Err(Error::InvalidNoise(noise_sd));
        }
        Ok(PredictorSpec::Oracle {
            reference,
            noise_sd,
            seed,
        })
    }

    /// Checks that a volume-backed predictor addresses a target of `dims`.
    pub fn check_target(&self, dims: Index3) -> Result<()> {
        match self {
            PredictorSpec::Window(_) => Ok(()),
            PredictorSpec::ProbFile(v) | PredictorSpec::Oracle { reference: v, .. } => {
                if v.dims() == dims {
                    Ok(())
                } else {
                    Err(Error::DimsMismatch {
                        left: v.dims(),
                        right: dims,
                    })
                }
            }
        }
    }

    /// Foreground probability for `patch`, which was cut from the parent
    /// volume at `location`. The window variant ignores `location`.
    pub fn predict(&self, patch: &Volume, location: &PatchSpec) -> Result<Volume> {
        patch.require_kind(VolumeKind::Hu)?;
        if patch.dims() != location.size {
            return Err(Error::DimsMismatch {
                left: patch.dims(),
                right: location.size,
            });
        }
        let grid = *patch.grid();
        let data = match self {
            PredictorSpec::Window(band) => patch.data().iter().map(|&hu| band.response(hu)).collect(),
            PredictorSpec::ProbFile(probs) => gather(probs, location)?,
            PredictorSpec::Oracle {
                reference,
                noise_sd,
                seed,
            } => {
                let mut data = gather(reference, location)?;
                if *noise_sd > 0.0 {
                    let normal = Normal::new(0.0, *noise_sd).map_err(|_| Error::InvalidNoise(*noise_sd))?;
                    let mut rng = ChaCha8Rng::seed_from_u64(patch_seed(*seed, location.start));
                    for v in &mut data {
                        *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
                    }
                }
                data
            }
        };
        Ok(Volume::from_parts(grid, VolumeKind::Probability, data))
    }
}

fn gather(source: &Volume, location: &PatchSpec) -> Result<Vec<f64>> {
    location.validate(source.dims())?;
    let mut data = alloc::vec![0.0; location.len()];
    let src = source.data();
    location.for_each_index(source.grid(), |local, parent| data[local] = src[parent]);
    Ok(data)
}

/// Per-patch noise seed, so results do not depend on prediction order.
fn patch_seed(seed: u64, start: Index3) -> u64 {
    start.iter().fold(splitmix(seed), |acc, &s| splitmix(acc ^ s as u64))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Estimates a contrast-lumen HU band: the most frequent (1 HU bins)
/// intensity above the 95th percentile, plus and minus `half_width`.
pub fn suggest_window(v: &Volume, half_width: f64) -> Result<(f64, f64)> {
    v.require_kind(VolumeKind::Hu)?;
    let mut sorted = v.data().to_vec();
    sorted.sort_by(f64::total_cmp);
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if min == max {
        return Err(Error::ConstantVolume);
    }
    let q = sorted[nearest_rank(95.0, sorted.len()) - 1];
    let above = sorted.partition_point(|&x| x <= q);
    let tail = if above < sorted.len() {
        &sorted[above..]
    } else {
        &sorted[sorted.partition_point(|&x| x < q)..]
    };
    let mut histogram: BTreeMap<i64, usize> = BTreeMap::new();
    for &x in tail {
        *histogram.entry(libm::round(x) as i64).or_default() += 1;
    }
    // Highest count wins; ties go to the lower intensity.
    let (mode, _) = histogram
        .iter()
        .fold((0i64, 0usize), |best, (&hu, &n)| if n > best.1 { (hu, n) } else { best });
    let mode = mode as f64;
    Ok((mode - half_width, mode + half_width))
}
