//! Point-spread-function metrics, theoretical resolution and range cuts.
//!
//! Widths are measured on the magnitude `|p|` at the half-power level
//! `peak/√2`.

use std::f64::consts::SQRT_2;
use std::fmt::Write;

use ndarray::{s, Array2, Axis};

use crate::error::{Error, Result};
use crate::geometry::{ApertureScan, ChirpConfig};
use crate::volume::ImageVolume;

/// Census peaks must reach this level relative to the global peak (dB).
pub const CENSUS_FLOOR_DB: f64 = -10.0;
/// Two census peaks are distinct if the profile dips this far below the
/// smaller of them in between (dB).
pub const CENSUS_DIP_DB: f64 = 3.0;
/// Level relative to the slice maximum that delimits a blob (dB).
pub const BLOB_LEVEL_DB: f64 = -6.0;

fn db_to_amplitude(db: f64) -> f64 {
    10f64.powf(db / 20.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsfReport {
    pub peak_index: [usize; 3],
    /// Peak position after 3-point parabolic refinement (m).
    pub peak_position: [f64; 3],
    pub peak_value: f64,
    /// Half-power full widths along x, y, z (m); `None` where the main lobe
    /// runs into the volume boundary.
    pub widths: [Option<f64>; 3],
    /// Peak over largest local maximum outside the main lobe (dB); `None`
    /// when there is no such maximum.
    pub sidelobe_ratio_db: Option<f64>,
}

impl PsfReport {
    /// `key: value` lines, one per field.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let axes = ["x", "y", "z"];
        for (a, name) in axes.iter().enumerate() {
            let _ = writeln!(out, "peak_{name}_m: {:.6}", self.peak_position[a]);
        }
        let _ = writeln!(
            out,
            "peak_index: {},{},{}",
            self.peak_index[0], self.peak_index[1], self.peak_index[2]
        );
        let _ = writeln!(out, "peak_value: {:.6e}", self.peak_value);
        for (a, name) in axes.iter().enumerate() {
            match self.widths[a] {
                Some(w) => {
                    let _ = writeln!(out, "width_{name}_m: {w:.6}");
                }
                None => {
                    let _ = writeln!(out, "width_{name}_m: unmeasurable");
                }
            }
        }
        match self.sidelobe_ratio_db {
            Some(r) => {
                let _ = writeln!(out, "sidelobe_ratio_db: {r:.3}");
            }
            None => {
                let _ = writeln!(out, "sidelobe_ratio_db: none");
            }
        }
        out
    }
}

fn axis_profile(mag: &ndarray::Array3<f64>, at: [usize; 3], axis: usize) -> Vec<f64> {
    match axis {
        0 => mag.slice(s![.., at[1], at[2]]).to_vec(),
        1 => mag.slice(s![at[0], .., at[2]]).to_vec(),
        _ => mag.slice(s![at[0], at[1], ..]).to_vec(),
    }
}

/// Fractional offset of a parabola's vertex through three samples.
fn parabolic_offset(left: f64, centre: f64, right: f64) -> f64 {
    let denom = left - 2.0 * centre + right;
    if denom == 0.0 {
        0.0
    } else {
        (0.5 * (left - right) / denom).clamp(-0.5, 0.5)
    }
}

/// Half-power crossings either side of `peak` in fractional samples.
fn half_power_crossings(profile: &[f64], peak: usize) -> (Option<f64>, Option<f64>) {
    let level = profile[peak] / SQRT_2;
    let crossing = |inside: usize, outside: usize| {
        let (a, b) = (profile[inside], profile[outside]);
        let f = (a - level) / (a - b);
        inside as f64 + f * (outside as f64 - inside as f64)
    };
    let left = (0..peak)
        .rev()
        .find(|&i| profile[i] < level)
        .map(|i| crossing(i + 1, i));
    let right = (peak + 1..profile.len())
        .find(|&i| profile[i] < level)
        .map(|i| crossing(i - 1, i));
    (left, right)
}

/// Half-power full width of a 1D magnitude profile around `peak`, in
/// samples, floored at one sample.
pub fn profile_width(profile: &[f64], peak: usize) -> Option<f64> {
    match half_power_crossings(profile, peak) {
        (Some(l), Some(r)) => Some((r - l).max(1.0)),
        _ => None,
    }
}

/// First local minimum walking outward from `peak` in each direction.
fn main_lobe_bounds(profile: &[f64], peak: usize) -> (usize, usize) {
    let mut lo = peak;
    while lo > 0 && profile[lo - 1] <= profile[lo] {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < profile.len() && profile[hi + 1] <= profile[hi] {
        hi += 1;
    }
    (lo, hi)
}

pub fn psf_metrics(volume: &ImageVolume) -> Result<PsfReport> {
    let mag = volume.magnitude();
    let peak = volume.argmax();
    let peak_value = mag[peak];
    if !(peak_value > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let shape = volume.shape();

    let mut peak_position = [0.0; 3];
    let mut widths = [None; 3];
    let mut lobe = [(0usize, 0usize); 3];
    for a in 0..3 {
        let profile = axis_profile(&mag, peak, a);
        let p = peak[a];
        let offset = if p > 0 && p + 1 < shape[a] {
            parabolic_offset(profile[p - 1], profile[p], profile[p + 1])
        } else {
            0.0
        };
        peak_position[a] = volume.origin[a] + (p as f64 + offset) * volume.spacing[a];
        widths[a] = profile_width(&profile, p).map(|w| w * volume.spacing[a]);
        lobe[a] = main_lobe_bounds(&profile, p);
    }

    let inside = |i: [usize; 3]| (0..3).all(|a| i[a] >= lobe[a].0 && i[a] <= lobe[a].1);
    let mut sidelobe: f64 = 0.0;
    for ((i, j, k), &m) in mag.indexed_iter() {
        if m <= sidelobe || inside([i, j, k]) {
            continue;
        }
        let idx = [i, j, k];
        let is_max = (0..3).all(|a| {
            let before = idx[a] == 0 || {
                let mut n = idx;
                n[a] -= 1;
                mag[n] <= m
            };
            let after = idx[a] + 1 == shape[a] || {
                let mut n = idx;
                n[a] += 1;
                mag[n] <= m
            };
            before && after
        });
        if is_max {
            sidelobe = m;
        }
    }

    Ok(PsfReport {
        peak_index: peak,
        peak_position,
        peak_value,
        widths,
        sidelobe_ratio_db: (sidelobe > 0.0).then(|| 20.0 * (peak_value / sidelobe).log10()),
    })
}

/// Distinct peaks of a magnitude profile: local maxima within
/// [`CENSUS_FLOOR_DB`] of the global peak, merged unless separated by a
/// dip of at least [`CENSUS_DIP_DB`] below the smaller neighbour peak.
pub fn peak_census(profile: &[f64]) -> Vec<usize> {
    let global = profile.iter().cloned().fold(0.0, f64::max);
    if !(global > 0.0) {
        return Vec::new();
    }
    let floor = global * db_to_amplitude(CENSUS_FLOOR_DB);
    let dip_factor = db_to_amplitude(-CENSUS_DIP_DB);
    let n = profile.len();
    let mut peaks: Vec<usize> = Vec::new();
    for i in 0..n {
        let m = profile[i];
        let rises = i == 0 || profile[i - 1] < m;
        let holds = i + 1 == n || profile[i + 1] <= m;
        if !(rises && holds && m >= floor) {
            continue;
        }
        match peaks.last().copied() {
            None => peaks.push(i),
            Some(last) => {
                let dip = profile[last..=i]
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if dip <= profile[last].min(m) * dip_factor {
                    peaks.push(i);
                } else if m > profile[last] {
                    *peaks.last_mut().unwrap() = i;
                }
            }
        }
    }
    peaks
}

/// Magnitude along z through `(ix, iy)`.
pub fn z_profile(volume: &ImageVolume, ix: usize, iy: usize) -> Vec<f64> {
    volume
        .data
        .slice(s![ix, iy, ..])
        .iter()
        .map(|v| v.norm())
        .collect()
}

/// Number of 4-connected regions at or above [`BLOB_LEVEL_DB`] of the
/// slice maximum.
pub fn count_blobs(slice: &Array2<f64>) -> usize {
    let max = slice.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) {
        return 0;
    }
    let level = max * db_to_amplitude(BLOB_LEVEL_DB);
    let (h, w) = slice.dim();
    let mut seen = Array2::<bool>::from_elem((h, w), false);
    let mut count = 0;
    for start in 0..h * w {
        let (i0, j0) = (start / w, start % w);
        if seen[[i0, j0]] || slice[[i0, j0]] < level {
            continue;
        }
        count += 1;
        let mut stack = vec![(i0, j0)];
        seen[[i0, j0]] = true;
        while let Some((i, j)) = stack.pop() {
            let mut visit = |a: usize, b: usize| {
                if !seen[[a, b]] && slice[[a, b]] >= level {
                    seen[[a, b]] = true;
                    stack.push((a, b));
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < h {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < w {
                visit(i, j + 1);
            }
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Resolution {
    /// Range resolution `c/(2B)` (m).
    pub dz: f64,
    /// Cross-range `λ0·z/(2·Dx)` (m); `None` for a single scan column.
    pub dx: Option<f64>,
    pub dy: Option<f64>,
}

pub fn theoretical_resolution(
    chirp: &ChirpConfig,
    scan: &ApertureScan,
    range_z: f64,
) -> Result<Resolution> {
    chirp.validate()?;
    scan.validate()?;
    if !(range_z.is_finite() && range_z > 0.0) {
        return Err(Error::InvalidParams(format!(
            "range must be positive, got {range_z}"
        )));
    }
    let (b, lambda) = chirp.bandwidth_and_wavelength();
    let (ext_x, ext_y) = scan.extent();
    let cross = |d: f64| (d > 0.0).then(|| lambda * range_z / (2.0 * d));
    Ok(Resolution {
        dz: chirp.c / (2.0 * b),
        dx: cross(ext_x),
        dy: cross(ext_y),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RangeCut {
    /// z of the plane actually returned (m).
    pub z: f64,
    pub index: usize,
    /// `|p|` indexed `[ix][iy]`.
    pub magnitude: Array2<f64>,
}

/// Index of the plane nearest `z`; ties go to the smaller z.
pub fn nearest_plane(volume: &ImageVolume, z: f64) -> Result<usize> {
    let nz = volume.shape()[2];
    let dz = volume.spacing[2];
    let lo = volume.origin[2];
    let hi = lo + (nz.saturating_sub(1)) as f64 * dz;
    let eps = 1e-9 * dz;
    if nz == 0 || !(z >= lo - eps && z <= hi + eps) {
        return Err(Error::OutOfExtent { z, lo, hi });
    }
    let f = (z - lo) / dz;
    Ok(((f - 0.5).ceil().max(0.0) as usize).min(nz - 1))
}

/// Constant-z magnitude slices, one per requested depth.
pub fn range_cuts(volume: &ImageVolume, z_values: &[f64]) -> Result<Vec<RangeCut>> {
    z_values
        .iter()
        .map(|&z| {
            let index = nearest_plane(volume, z)?;
            Ok(RangeCut {
                z: volume.origin[2] + index as f64 * volume.spacing[2],
                index,
                magnitude: volume.data.index_axis(Axis(2), index).mapv(|v| v.norm()),
            })
        })
        .collect()
}
