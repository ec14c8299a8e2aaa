//! Segmentation metrics (overlap counts, Dice, IoU, recall, precision,
//! Hausdorff distance) and k-fold evaluation bookkeeping.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::morphology::boundary_voxels;
use crate::volume::{nearest_rank, Grid, Volume, VolumeKind};

/// Voxelwise confusion counts of a predicted mask against a reference.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

pub fn confusion(pred: &Volume, truth: &Volume) -> Result<Confusion> {
    pred.require_kind(VolumeKind::Label)?;
    truth.require_kind(VolumeKind::Label)?;
    pred.require_same_dims(truth)?;
    let mut c = Confusion::default();
    for (&p, &t) in pred.data().iter().zip(truth.data()) {
        match (p != 0.0, t != 0.0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CountingMetrics {
    pub dsc: f64,
    pub iou: f64,
    pub recall: f64,
    pub precision: f64,
    /// Both masks empty; every score is reported as 1 by convention.
    pub both_empty: bool,
}

/// Dice, IoU, recall and precision from confusion counts.
///
/// A ratio whose denominator is zero (recall with an empty reference,
/// precision with an empty prediction) is 1, which keeps
/// `dsc = 2PR / (P + R)` valid for every row.
pub fn counting_metrics(c: &Confusion) -> CountingMetrics {
    let (tp, fp, fn_) = (c.tp as f64, c.fp as f64, c.fn_ as f64);
    if c.tp + c.fp + c.fn_ == 0 {
        return CountingMetrics {
            dsc: 1.0,
            iou: 1.0,
            recall: 1.0,
            precision: 1.0,
            both_empty: true,
        };
    }
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 1.0 };
    CountingMetrics {
        dsc: 2.0 * tp / (2.0 * tp + fp + fn_),
        iou: tp / (tp + fp + fn_),
        recall: ratio(tp, tp + fn_),
        precision: ratio(tp, tp + fp),
        both_empty: false,
    }
}

/// Exact squared Euclidean distance transform (spacing-aware) to the set
/// of `sites`, via separable lower envelopes of parabolas.
fn squared_distance_transform(grid: &Grid, sites: &[bool]) -> Vec<f64> {
    let dims = grid.dims;
    let mut dist: Vec<f64> = sites.iter().map(|&s| if s { 0.0 } else { f64::INFINITY }).collect();
    let longest = dims.iter().copied().max().unwrap_or(0);
    let mut line = alloc::vec![0.0; longest];
    let mut out = alloc::vec![0.0; longest];
    let mut vertices = alloc::vec![0usize; longest];
    let mut bounds = alloc::vec![0.0; longest + 1];
    let strides = [1, dims[0], dims[0] * dims[1]];

    for axis in 0..3 {
        let n = dims[axis];
        let weight = grid.spacing[axis] * grid.spacing[axis];
        let (a1, a2) = ((axis + 1) % 3, (axis + 2) % 3);
        for j in 0..dims[a2] {
            for i in 0..dims[a1] {
                let base = i * strides[a1] + j * strides[a2];
                for q in 0..n {
                    line[q] = dist[base + q * strides[axis]];
                }
                envelope_1d(&line[..n], weight, &mut out[..n], &mut vertices, &mut bounds);
                for q in 0..n {
                    dist[base + q * strides[axis]] = out[q];
                }
            }
        }
    }
    dist
}

fn envelope_1d(f: &[f64], weight: f64, out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: usize = 0;
    let mut any = false;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        if !any {
            any = true;
            v[0] = q;
            z[0] = f64::NEG_INFINITY;
            z[1] = f64::INFINITY;
            continue;
        }
        let fq = f[q] + weight * (q * q) as f64;
        loop {
            let p = v[k];
            let s = (fq - (f[p] + weight * (p * p) as f64)) / (2.0 * weight * (q - p) as f64);
            // z[0] is -inf, so k never underflows
            if s <= z[k] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k] = q;
            z[k] = s;
            z[k + 1] = f64::INFINITY;
            break;
        }
    }
    if !any {
        out.fill(f64::INFINITY);
        return;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = weight * d * d + f[v[k]];
    }
}

/// Distances (mm) from every boundary voxel of `from` to the nearest
/// boundary voxel of `to`, sorted ascending.
fn directed_surface_distances(from: &Volume, to: &Volume) -> Result<Vec<f64>> {
    let grid = to.grid();
    let mut sites = alloc::vec![false; grid.len()];
    for p in boundary_voxels(to)? {
        sites[grid.index(p)] = true;
    }
    let edt = squared_distance_transform(grid, &sites);
    let mut d: Vec<f64> = boundary_voxels(from)?
        .into_iter()
        .map(|p| libm::sqrt(edt[grid.index(p)]))
        .collect();
    d.sort_by(f64::total_cmp);
    Ok(d)
}

fn check_surface_pair(a: &Volume, b: &Volume) -> Result<()> {
    a.require_kind(VolumeKind::Label)?;
    b.require_kind(VolumeKind::Label)?;
    a.require_same_dims(b)?;
    if a.spacing() != b.spacing() {
        return Err(Error::SpacingMismatch {
            left: a.spacing(),
            right: b.spacing(),
        });
    }
    if a.count_nonzero() == 0 || b.count_nonzero() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(())
}

/// Symmetric surface distances at each requested percentile (nearest rank
/// per direction, then the larger of the two directions).
pub fn hausdorff_percentiles<const N: usize>(a: &Volume, b: &Volume, percentiles: [f64; N]) -> Result<[f64; N]> {
    check_surface_pair(a, b)?;
    if let Some(&p) = percentiles.iter().find(|&&p| !(p > 0.0 && p <= 100.0)) {
        return Err(Error::InvalidPercentile(p));
    }
    let ab = directed_surface_distances(a, b)?;
    let ba = directed_surface_distances(b, a)?;
    Ok(percentiles.map(|p| {
        let left = ab[nearest_rank(p, ab.len()) - 1];
        let right = ba[nearest_rank(p, ba.len()) - 1];
        left.max(right)
    }))
}

/// Hausdorff distance in millimeters; `percentile = 100` is the classic
/// maximum, 95 gives HD95.
pub fn hausdorff(a: &Volume, b: &Volume, percentile: f64) -> Result<f64> {
    hausdorff_percentiles(a, b, [percentile]).map(|[d]| d)
}

/// Per-case (or aggregate) evaluation record.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRow {
    pub case_id: String,
    pub dsc: f64,
    pub iou: f64,
    pub recall: f64,
    pub precision: f64,
    /// Absent when either mask is empty.
    pub hd: Option<f64>,
    pub hd95: Option<f64>,
    pub both_empty: bool,
}

pub fn evaluate_case(case_id: &str, pred: &Volume, truth: &Volume) -> Result<MetricsRow> {
    let counts = counting_metrics(&confusion(pred, truth)?);
    let (hd, hd95) = if pred.count_nonzero() > 0 && truth.count_nonzero() > 0 {
        let [hd, hd95] = hausdorff_percentiles(pred, truth, [100.0, 95.0])?;
        (Some(hd), Some(hd95))
    } else {
        (None, None)
    };
    Ok(MetricsRow {
        case_id: case_id.into(),
        dsc: counts.dsc,
        iou: counts.iou,
        recall: counts.recall,
        precision: counts.precision,
        hd,
        hd95,
        both_empty: counts.both_empty,
    })
}

/// Arithmetic mean of each metric. Distances average over the rows that
/// carry them.
pub fn mean_row(label: &str, rows: &[MetricsRow]) -> Result<MetricsRow> {
    if rows.is_empty() {
        return Err(Error::EmptyAggregate);
    }
    let n = rows.len() as f64;
    let mean = |f: fn(&MetricsRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    let mean_opt = |f: fn(&MetricsRow) -> Option<f64>| {
        let present: Vec<f64> = rows.iter().filter_map(f).collect();
        (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64)
    };
    Ok(MetricsRow {
        case_id: label.into(),
        dsc: mean(|r| r.dsc),
        iou: mean(|r| r.iou),
        recall: mean(|r| r.recall),
        precision: mean(|r| r.precision),
        hd: mean_opt(|r| r.hd),
        hd95: mean_opt(|r| r.hd95),
        both_empty: false,
    })
}

/// Averages per-fold mean rows into the overall row.
pub fn aggregate_folds(rows: &[MetricsRow]) -> Result<MetricsRow> {
    mean_row("average", rows)
}

/// Round half up to `decimals` places. The scaled value is first snapped to
/// 1e-6 so that binary representation error (92.05 stored as 92.0499…)
/// does not flip the tie.
pub fn round_half_up(x: f64, decimals: i32) -> f64 {
    let scale = libm::pow(10.0, decimals as f64);
    let scaled = libm::round(x * scale * 1e6) / 1e6;
    libm::floor(scaled + 0.5) / scale
}

/// Seeded k-fold partition of case ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldSplit {
    /// Case ids in input order.
    pub case_ids: Vec<String>,
    pub fold_of: BTreeMap<String, usize>,
    pub seed: u64,
    pub k: usize,
}

impl FoldSplit {
    /// Members of each fold, in input order.
    pub fn folds(&self) -> Vec<Vec<String>> {
        let mut folds = alloc::vec![Vec::new(); self.k];
        for id in &self.case_ids {
            folds[self.fold_of[id]].push(id.clone());
        }
        folds
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        self.folds().iter().map(Vec::len).collect()
    }
}

/// Shuffles the ids with a seeded generator, then deals them round-robin
/// into `k` folds, so fold sizes differ by at most one.
pub fn make_folds(case_ids: &[String], k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 || case_ids.len() < k {
        return Err(Error::TooFewCases {
            cases: case_ids.len(),
            k,
        });
    }
    let mut order: Vec<usize> = (0..case_ids.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold_of = BTreeMap::new();
    for (position, &i) in order.iter().enumerate() {
        if fold_of.insert(case_ids[i].clone(), position % k).is_some() {
            return Err(Error::DuplicateCase(case_ids[i].clone()));
        }
    }
    Ok(FoldSplit {
        case_ids: case_ids.to_vec(),
        fold_of,
        seed,
        k,
    })
}
