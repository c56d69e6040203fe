//! Exact time-domain matched filter, the adjoint of the forward model.
//!
//! Every voxel sums `s·exp(−j·k·(R_T + R_R))` over all scan positions,
//! channels and wavenumbers with exact per-voxel distances. Cost is
//! `O(voxels × measurements)`; it exists to be trusted, not to be fast.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sim::{distance, BeatCube};
use crate::volume::ImageVolume;

/// A uniform voxel grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoxelGrid {
    pub shape: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl VoxelGrid {
    pub fn of_volume(volume: &ImageVolume) -> Self {
        Self {
            shape: volume.shape(),
            spacing: volume.spacing,
            origin: volume.origin,
        }
    }

    /// The `(2·half+1)³` block of `volume`'s grid centred on `centre`,
    /// clipped to the volume. Returns the block and its first index.
    pub fn neighborhood(
        volume: &ImageVolume,
        centre: [usize; 3],
        half: usize,
    ) -> (Self, [usize; 3]) {
        let shape = volume.shape();
        let mut start = [0usize; 3];
        let mut len = [0usize; 3];
        for a in 0..3 {
            start[a] = centre[a].saturating_sub(half);
            let end = (centre[a] + half + 1).min(shape[a]);
            len[a] = end.saturating_sub(start[a]);
        }
        (
            Self {
                shape: len,
                spacing: volume.spacing,
                origin: volume.voxel_position(start),
            },
            start,
        )
    }

    pub fn voxel_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn position(&self, index: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + index[a] as f64 * self.spacing[a])
    }
}

/// Matched-filter image of `cube` on `grid`.
pub fn backproject(cube: &BeatCube, grid: &VoxelGrid) -> Result<ImageVolume> {
    cube.validate()?;
    if grid.voxel_count() == 0 {
        return Err(Error::InvalidGrid(format!(
            "grid {:?} has no voxels",
            grid.shape
        )));
    }
    if !grid.spacing.iter().all(|d| d.is_finite() && *d > 0.0)
        || !grid.origin.iter().all(|o| o.is_finite())
    {
        return Err(Error::InvalidGrid(
            "spacings must be positive and origin finite".into(),
        ));
    }
    let k_axis = cube.chirp.wavenumber_axis();
    let scan = &cube.scan;
    let n_ch = cube.layout.channel_count();

    let mut elements = Vec::with_capacity(scan.nx * scan.ny * n_ch);
    for ix in 0..scan.nx {
        for iy in 0..scan.ny {
            for ch in 0..n_ch {
                let (tx, rx) = cube.element_positions(ix, iy, ch);
                elements.push((tx, rx, [ix, iy, ch]));
            }
        }
    }

    let [nx, ny, nz] = grid.shape;
    let values: Vec<Complex64> = (0..nx * ny * nz)
        .into_par_iter()
        .map(|flat| {
            let index = [flat / (ny * nz), (flat / nz) % ny, flat % nz];
            let voxel = grid.position(index);
            let mut acc = Complex64::new(0.0, 0.0);
            for (tx, rx, [ix, iy, ch]) in &elements {
                let path = distance(tx, &voxel) + distance(rx, &voxel);
                for (n, &k) in k_axis.iter().enumerate() {
                    acc += cube.data[[*ix, *iy, *ch, n]] * Complex64::from_polar(1.0, -k * path);
                }
            }
            acc
        })
        .collect();

    let data = ndarray::Array3::from_shape_vec((nx, ny, nz), values)
        .map_err(|e| Error::InvalidGrid(e.to_string()))?;
    Ok(ImageVolume {
        data,
        spacing: grid.spacing,
        origin: grid.origin,
    })
}

/// Agreement between two volumes on the same grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolumeComparison {
    /// `argmax|a| − argmax|b|` in voxels.
    pub peak_offset: [i64; 3],
    /// `⟨|a|, |b|⟩ / (‖a‖·‖b‖)`.
    pub correlation: f64,
}

pub fn compare_volumes(a: &ImageVolume, b: &ImageVolume) -> Result<VolumeComparison> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch {
            a: a.shape(),
            b: b.shape(),
        });
    }
    let (mut dot, mut na, mut nb) = (0.0, 0.0, 0.0);
    for (x, y) in a.data.iter().zip(b.data.iter()) {
        let (x, y) = (x.norm(), y.norm());
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let pa = a.argmax();
    let pb = b.argmax();
    Ok(VolumeComparison {
        peak_offset: [0, 1, 2].map(|i| pa[i] as i64 - pb[i] as i64),
        correlation: dot.abs() / (na.sqrt() * nb.sqrt()),
    })
}
