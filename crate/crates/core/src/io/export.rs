//! Range cuts as binary (P5) portable graymaps.
//!
//! Pixel value: `round_half_up(255·clamp((20·log10(|p|/max) − floor)/(−floor), 0, 1))`
//! with `max` the global volume maximum. Columns run along x; the first row
//! is the largest y so +y points up.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::range_cuts;
use crate::error::{Error, Result};
use crate::volume::ImageVolume;

pub const DEFAULT_FLOOR_DB: f64 = -40.0;

pub fn pixel_value(magnitude: f64, global_max: f64, floor_db: f64) -> u8 {
    if !(global_max > 0.0) || !(magnitude > 0.0) {
        return 0;
    }
    let db = 20.0 * (magnitude / global_max).log10();
    let t = ((db - floor_db) / -floor_db).clamp(0.0, 1.0);
    (t * 255.0 + 0.5).floor() as u8
}

/// File name for a cut at `z` metres, e.g. `cut_z0540.0mm.pgm`.
pub fn slice_file_name(z: f64) -> String {
    format!("cut_z{:06.1}mm.pgm", z * 1e3)
}

/// Writes one graymap per requested depth into `dir`; returns the paths.
pub fn export_slices(
    volume: &ImageVolume,
    z_values: &[f64],
    floor_db: f64,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    if !(floor_db.is_finite() && floor_db < 0.0) {
        return Err(Error::InvalidParams(format!(
            "floor must be a negative dB value, got {floor_db}"
        )));
    }
    let cuts = range_cuts(volume, z_values)?;
    let global_max = volume.max_magnitude();
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::with_capacity(cuts.len());
    for cut in cuts {
        let (nx, ny) = cut.magnitude.dim();
        let path = dir.join(slice_file_name(cut.z));
        let mut w = BufWriter::new(File::create(&path)?);
        write!(w, "P5\n{nx} {ny}\n255\n")?;
        let mut row = vec![0u8; nx];
        for iy in (0..ny).rev() {
            for (ix, px) in row.iter_mut().enumerate() {
                *px = pixel_value(cut.magnitude[[ix, iy]], global_max, floor_db);
            }
            w.write_all(&row)?;
        }
        w.flush()?;
        paths.push(path);
    }
    Ok(paths)
}
