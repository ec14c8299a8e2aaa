//! Connected components in 2D and 3D, centroids, size filtering and
//! boundary extraction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volume::{Grid, Index3, Volume, VolumeKind};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Connectivity3d {
    /// Face neighbors.
    Six,
    /// Face, edge and corner neighbors.
    #[default]
    TwentySix,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Connectivity2d {
    Four,
    #[default]
    Eight,
}

impl Connectivity3d {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            6 => Some(Self::Six),
            26 => Some(Self::TwentySix),
            _ => None,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Self::Six => 6,
            Self::TwentySix => 26,
        }
    }

    /// Neighbor offsets that precede a voxel in linear scan order.
    fn backward_offsets(self) -> Vec<[isize; 3]> {
        let mut out = Vec::new();
        for dz in -1isize..=0 {
            for dy in -1isize..=1 {
                for dx in -1isize..=1 {
                    let before = dz < 0 || (dz == 0 && dy < 0) || (dz == 0 && dy == 0 && dx < 0);
                    let manhattan = dx.abs() + dy.abs() + dz.abs();
                    if before && (self == Self::TwentySix || manhattan == 1) {
                        out.push([dx, dy, dz]);
                    }
                }
            }
        }
        out
    }
}

impl Connectivity2d {
    pub fn from_count(n: u32) -> Option<Self> {
        match n {
            4 => Some(Self::Four),
            8 => Some(Self::Eight),
            _ => None,
        }
    }

    pub fn count(self) -> u32 {
        match self {
            Self::Four => 4,
            Self::Eight => 8,
        }
    }

    fn backward_offsets(self) -> Vec<[isize; 3]> {
        match self {
            Self::Four => alloc::vec![[-1, 0, 0], [0, -1, 0]],
            Self::Eight => alloc::vec![[-1, 0, 0], [-1, -1, 0], [0, -1, 0], [1, -1, 0]],
        }
    }
}

fn find(parent: &mut [u32], mut i: u32) -> u32 {
    while parent[i as usize] != i {
        let grand = parent[parent[i as usize] as usize];
        parent[i as usize] = grand;
        i = grand;
    }
    i
}

struct RawLabels {
    labels: Vec<u32>,
    sizes: Vec<usize>,
}

/// Two-pass union-find labeling over a boolean grid. Labels are dense and
/// numbered by the first voxel encountered in linear scan order.
fn label_grid(dims: Index3, foreground: impl Fn(usize) -> bool, offsets: &[[isize; 3]]) -> RawLabels {
    let [nx, ny, nz] = dims;
    let mut labels = alloc::vec![0u32; nx * ny * nz];
    // provisional label 0 is unused so that parent[l] is addressable by label
    let mut parent: Vec<u32> = alloc::vec![0];
    let mut i = 0;
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if foreground(i) {
                    let mut current = 0u32;
                    for &[dx, dy, dz] in offsets {
                        let (qx, qy, qz) = (x as isize + dx, y as isize + dy, z as isize + dz);
                        if qx < 0 || qy < 0 || qz < 0 || qx >= nx as isize || qy >= ny as isize {
                            continue;
                        }
                        let q = qx as usize + nx * (qy as usize + ny * qz as usize);
                        let neighbor = labels[q];
                        if neighbor == 0 {
                            continue;
                        }
                        if current == 0 {
                            current = find(&mut parent, neighbor);
                        } else {
                            let a = find(&mut parent, current);
                            let b = find(&mut parent, neighbor);
                            if a != b {
                                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                                parent[hi as usize] = lo;
                                current = lo;
                            }
                        }
                    }
                    if current == 0 {
                        current = parent.len() as u32;
                        parent.push(current);
                    }
                    labels[i] = current;
                }
                i += 1;
            }
        }
    }
    let mut dense = alloc::vec![0u32; parent.len()];
    let mut sizes = Vec::new();
    for l in labels.iter_mut().filter(|l| **l != 0) {
        let root = find(&mut parent, *l) as usize;
        if dense[root] == 0 {
            sizes.push(0);
            dense[root] = sizes.len() as u32;
        }
        *l = dense[root];
        sizes[*l as usize - 1] += 1;
    }
    RawLabels { labels, sizes }
}

/// 3D component labeling of a mask.
#[derive(Clone, Debug, PartialEq)]
pub struct ComponentLabeling {
    pub grid: Grid,
    /// 0 for background, `1..=count` for components.
    pub labels: Vec<u32>,
    /// Voxel count of label `l` at index `l - 1`.
    pub sizes: Vec<usize>,
    pub connectivity: Connectivity3d,
}

impl ComponentLabeling {
    pub fn count(&self) -> u32 {
        self.sizes.len() as u32
    }

    fn check_label(&self, label: u32) -> Result<()> {
        if label == 0 || label > self.count() {
            Err(Error::UnknownLabel {
                label,
                count: self.count(),
            })
        } else {
            Ok(())
        }
    }

    /// Mean voxel index of a component.
    pub fn centroid(&self, label: u32) -> Result<[f64; 3]> {
        self.check_label(label)?;
        let mut sum = [0.0; 3];
        for (i, _) in self.labels.iter().enumerate().filter(|(_, &l)| l == label) {
            let c = self.grid.coord(i);
            (0..3).for_each(|a| sum[a] += c[a] as f64);
        }
        let n = self.sizes[label as usize - 1] as f64;
        Ok(sum.map(|s| s / n))
    }

    /// Mask keeping components with at least `min_size` voxels.
    pub fn filter_components(&self, min_size: usize) -> Volume {
        let data = self
            .labels
            .iter()
            .map(|&l| if l != 0 && self.sizes[l as usize - 1] >= min_size { 1.0 } else { 0.0 })
            .collect();
        Volume::from_parts(self.grid, VolumeKind::Label, data)
    }
}

pub fn label_components_3d(mask: &Volume, connectivity: Connectivity3d) -> Result<ComponentLabeling> {
    mask.require_kind(VolumeKind::Label)?;
    let data = mask.data();
    let raw = label_grid(mask.dims(), |i| data[i] != 0.0, &connectivity.backward_offsets());
    Ok(ComponentLabeling {
        grid: *mask.grid(),
        labels: raw.labels,
        sizes: raw.sizes,
        connectivity,
    })
}

/// Labeling of a 2D slice, stored row-major with `u` fastest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling2d {
    pub width: usize,
    pub height: usize,
    pub labels: Vec<u32>,
    pub sizes: Vec<usize>,
    pub connectivity: Connectivity2d,
}

impl ComponentLabeling2d {
    pub fn count(&self) -> u32 {
        self.sizes.len() as u32
    }

    pub fn centroid(&self, label: u32) -> Result<[f64; 2]> {
        if label == 0 || label > self.count() {
            return Err(Error::UnknownLabel {
                label,
                count: self.count(),
            });
        }
        let mut sum = [0.0; 2];
        for (i, _) in self.labels.iter().enumerate().filter(|(_, &l)| l == label) {
            sum[0] += (i % self.width) as f64;
            sum[1] += (i / self.width) as f64;
        }
        let n = self.sizes[label as usize - 1] as f64;
        Ok(sum.map(|s| s / n))
    }

    /// Centroids of all components, in label order, from a single pass.
    pub fn centroids(&self) -> Vec<[f64; 2]> {
        let mut sums = alloc::vec![[0.0f64; 2]; self.sizes.len()];
        for (i, &l) in self.labels.iter().enumerate().filter(|(_, &l)| l != 0) {
            let s = &mut sums[l as usize - 1];
            s[0] += (i % self.width) as f64;
            s[1] += (i / self.width) as f64;
        }
        sums.iter()
            .zip(&self.sizes)
            .map(|(s, &n)| [s[0] / n as f64, s[1] / n as f64])
            .collect()
    }
}

/// Labels a `width x height` boolean slice given row-major.
pub fn label_components_2d(
    slice: &[bool],
    width: usize,
    height: usize,
    connectivity: Connectivity2d,
) -> Result<ComponentLabeling2d> {
    if width * height != slice.len() {
        return Err(Error::DataLength {
            expected: width * height,
            actual: slice.len(),
        });
    }
    let raw = label_grid([width, height, 1], |i| slice[i], &connectivity.backward_offsets());
    Ok(ComponentLabeling2d {
        width,
        height,
        labels: raw.labels,
        sizes: raw.sizes,
        connectivity,
    })
}

/// Foreground voxels with at least one background face neighbor; voxels on
/// the volume border count missing neighbors as background. Linear order.
pub fn boundary_voxels(mask: &Volume) -> Result<Vec<Index3>> {
    mask.require_kind(VolumeKind::Label)?;
    let grid = mask.grid();
    let [nx, ny, nz] = grid.dims;
    let data = mask.data();
    let fg = |x: usize, y: usize, z: usize| data[x + nx * (y + ny * z)] != 0.0;
    let mut out = Vec::new();
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                if !fg(x, y, z) {
                    continue;
                }
                let interior = x > 0
                    && y > 0
                    && z > 0
                    && x + 1 < nx
                    && y + 1 < ny
                    && z + 1 < nz
                    && fg(x - 1, y, z)
                    && fg(x + 1, y, z)
                    && fg(x, y - 1, z)
                    && fg(x, y + 1, z)
                    && fg(x, y, z - 1)
                    && fg(x, y, z + 1);
                if !interior {
                    out.push([x, y, z]);
                }
            }
        }
    }
    Ok(out)
}
