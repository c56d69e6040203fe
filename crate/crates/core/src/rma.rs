//! Range-migration (ω-k) reconstruction.
//!
//! Pipeline: collapse the virtual array onto a dense monostatic grid,
//! optionally taper the aperture, 2D FFT over the aperture, Stolt-resample
//! every `(kx, ky)` bin from its nonuniform `kz = sqrt(4k² − kx² − ky²)`
//! samples onto one shared uniform `kz` grid, multiply by the reference
//! phase `exp(−j·kz·z0)` and take a 3D inverse FFT.
//!
//! The forward model carries `exp(+j·k·(R_T + R_R))`; the aperture
//! spectrum is taken of the conjugated samples, so a scatterer at
//! `(x, y, z)` contributes `exp(−j(kx·x' + ky·y' + kz·(z − z_plane)))`
//! with `x', y'` measured from the grid origin. After the reference phase
//! the image plane `iz` sits at `z = z_plane − z0 + iz·Δz`.

use std::f64::consts::PI;

use ndarray::{s, Array3, Axis};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::fft::{bin_frequencies, transform_axis};
use crate::sim::BeatCube;
use crate::volume::ImageVolume;

/// Position tolerance when snapping phase centres onto a grid (m).
pub const GRID_TOLERANCE: f64 = 1e-9;

/// Effective-monostatic samples `s(x0, y0, k)` on a uniform aperture grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MonostaticGrid {
    /// Indexed `[ix][iy][k]`.
    pub data: Array3<Complex64>,
    pub origin: [f64; 2],
    pub spacing: [f64; 2],
    pub z_plane: f64,
    pub k_axis: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    None,
    /// Separable raised-cosine taper over the aperture.
    RaisedCosine,
}

impl Window {
    pub fn as_str(self) -> &'static str {
        match self {
            Window::None => "none",
            Window::RaisedCosine => "raised-cosine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "none" => Some(Window::None),
            "raised-cosine" | "hann" => Some(Window::RaisedCosine),
            _ => None,
        }
    }

    /// Taper weights for `n` samples. The raised cosine keeps both end
    /// samples nonzero: `w_i = ½ − ½·cos(2π(i+1)/(n+1))`.
    pub fn weights(self, n: usize) -> Vec<f64> {
        match self {
            Window::None => vec![1.0; n],
            Window::RaisedCosine => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * (i + 1) as f64 / (n + 1) as f64).cos())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumStage {
    /// Third axis is the measured wavenumber `k`.
    PreStolt,
    /// Third axis is a uniform `kz` grid.
    PostStolt,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KSpaceSpectrum {
    /// Indexed `[ikx][iky][ik or ikz]`, bins in natural DFT order.
    pub data: Array3<Complex64>,
    pub kx_axis: Vec<f64>,
    pub ky_axis: Vec<f64>,
    pub third_axis: Vec<f64>,
    pub stage: SpectrumStage,
    /// Aperture sample pitch `(dx, dy)`.
    pub spacing: [f64; 2],
    /// Image-domain position of the first voxel. The z component tracks the
    /// range reference and is updated by [`apply_reference_phase`].
    pub origin: [f64; 3],
    pub warnings: Vec<String>,
}

/// Snaps one coordinate set onto a uniform axis. Returns `(min, step, count)`.
fn infer_axis(values: &[f64], fallback_step: f64) -> (f64, f64, usize) {
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut unique: Vec<f64> = Vec::new();
    for v in sorted {
        match unique.last() {
            Some(&u) if (v - u).abs() <= GRID_TOLERANCE => {}
            _ => unique.push(v),
        }
    }
    let lo = unique[0];
    let n = unique.len();
    let step = if n > 1 {
        (unique[n - 1] - lo) / (n - 1) as f64
    } else {
        fallback_step
    };
    (lo, step, n)
}

/// Places every (scan position, virtual channel) phase centre on a dense
/// uniform monostatic grid. Each grid point must be hit exactly once.
pub fn collapse_virtual_array(cube: &BeatCube) -> Result<MonostaticGrid> {
    cube.validate()?;
    let scan = &cube.scan;
    let channels = cube.layout.virtual_channels();
    let n_ch = channels.len();

    let mut centres = Vec::with_capacity(scan.nx * scan.ny * n_ch);
    for ix in 0..scan.nx {
        for iy in 0..scan.ny {
            let p = scan.position(ix, iy);
            for (ch, c) in channels.iter().enumerate() {
                centres.push(((ix, iy, ch), [p[0] + c[0], p[1] + c[1]]));
            }
        }
    }
    let xs: Vec<f64> = centres.iter().map(|c| c.1[0]).collect();
    let ys: Vec<f64> = centres.iter().map(|c| c.1[1]).collect();
    let (x0, dx, nx) = infer_axis(&xs, scan.dx);
    let (y0, dy, ny) = infer_axis(&ys, scan.dy);

    let describe = |(ix, iy, ch): (usize, usize, usize), p: [f64; 2]| {
        format!(
            "scan ({ix}, {iy}) channel {ch} at ({:.9}, {:.9}) m",
            p[0], p[1]
        )
    };

    let n_k = cube.chirp.n_samples;
    let mut data = Array3::<Complex64>::zeros((nx, ny, n_k));
    let mut filled = vec![false; nx * ny];
    for &(key, p) in &centres {
        let gx = ((p[0] - x0) / dx).round();
        let gy = ((p[1] - y0) / dy).round();
        let (gx, gy) = (gx as usize, gy as usize);
        let off_x = (p[0] - (x0 + gx as f64 * dx)).abs();
        let off_y = (p[1] - (y0 + gy as f64 * dy)).abs();
        if gx >= nx || gy >= ny || off_x > GRID_TOLERANCE || off_y > GRID_TOLERANCE {
            return Err(Error::NonUniformGrid(format!(
                "{} is off the inferred {nx}x{ny} grid",
                describe(key, p)
            )));
        }
        let slot = gx * ny + gy;
        if filled[slot] {
            return Err(Error::NonUniformGrid(format!(
                "{} overlaps an earlier phase centre",
                describe(key, p)
            )));
        }
        filled[slot] = true;
        let (ix, iy, ch) = key;
        data.slice_mut(s![gx, gy, ..])
            .assign(&cube.data.slice(s![ix, iy, ch, ..]));
    }
    if let Some(hole) = filled.iter().position(|f| !f) {
        return Err(Error::NonUniformGrid(format!(
            "grid point ({}, {}) has no phase centre",
            hole / ny,
            hole % ny
        )));
    }

    Ok(MonostaticGrid {
        data,
        origin: [x0, y0],
        spacing: [dx, dy],
        z_plane: scan.z_plane(),
        k_axis: cube.chirp.wavenumber_axis(),
    })
}

/// Multiplies the grid by a separable aperture taper.
pub fn apply_window(grid: &MonostaticGrid, window: Window) -> MonostaticGrid {
    let mut out = grid.clone();
    if window == Window::None {
        return out;
    }
    let (nx, ny, _) = grid.data.dim();
    let wx = window.weights(nx);
    let wy = window.weights(ny);
    for ((ix, iy, _), v) in out.data.indexed_iter_mut() {
        *v *= wx[ix] * wy[iy];
    }
    out
}

/// 2D DFT over the aperture for every wavenumber slice.
///
/// `zero_pad` multiplies the aperture sample counts; zeros are appended
/// after the last aperture sample, so the grid origin is unchanged.
pub fn aperture_fft(grid: &MonostaticGrid, zero_pad: [usize; 2]) -> Result<KSpaceSpectrum> {
    if zero_pad.contains(&0) {
        return Err(Error::InvalidParams(format!(
            "zero-padding factors must be at least 1, got {zero_pad:?}"
        )));
    }
    let (nx, ny, nk) = grid.data.dim();
    let (px, py) = (nx * zero_pad[0], ny * zero_pad[1]);
    let mut data = Array3::<Complex64>::zeros((px, py, nk));
    data.slice_mut(s![..nx, ..ny, ..])
        .assign(&grid.data.mapv(|v| v.conj()));
    transform_axis(&mut data, 0, FftDirection::Forward);
    transform_axis(&mut data, 1, FftDirection::Forward);

    let axis = |n: usize, d: f64| -> Vec<f64> {
        bin_frequencies(n)
            .into_iter()
            .map(|f| 2.0 * PI * f / d)
            .collect()
    };
    Ok(KSpaceSpectrum {
        data,
        kx_axis: axis(px, grid.spacing[0]),
        ky_axis: axis(py, grid.spacing[1]),
        third_axis: grid.k_axis.clone(),
        stage: SpectrumStage::PreStolt,
        spacing: grid.spacing,
        origin: [grid.origin[0], grid.origin[1], grid.z_plane],
        warnings: Vec::new(),
    })
}

/// Two-way dispersion relation `kz = sqrt(4k² − kx² − ky²)`; `None` for
/// evanescent components.
pub fn dispersion_kz(kx: f64, ky: f64, k: f64) -> Option<f64> {
    let arg = 4.0 * k * k - kx * kx - ky * ky;
    if arg >= 0.0 {
        Some(arg.sqrt())
    } else {
        None
    }
}

/// Bounds `[kz_lo, kz_hi]` of the shared uniform kz grid.
pub fn kz_bounds(kx_axis: &[f64], ky_axis: &[f64], k_min: f64, k_max: f64) -> (f64, f64) {
    let kx_max = kx_axis.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let ky_max = ky_axis.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lo = (4.0 * k_min * k_min - kx_max * kx_max - ky_max * ky_max)
        .max(0.0)
        .sqrt();
    (lo, 2.0 * k_max)
}

pub fn uniform_kz_axis(lo: f64, hi: f64, nz: usize) -> Vec<f64> {
    let step = (hi - lo) / (nz - 1) as f64;
    (0..nz).map(|m| lo + m as f64 * step).collect()
}

/// Piecewise-linear interpolation of `(nodes, values)` at sorted `targets`;
/// zero outside `[nodes[0], nodes[last]]`.
fn interpolate_lane(nodes: &[f64], values: &[Complex64], targets: &[f64], out: &mut [Complex64]) {
    let zero = Complex64::new(0.0, 0.0);
    if nodes.is_empty() {
        out.fill(zero);
        return;
    }
    let first = nodes[0];
    let last = nodes[nodes.len() - 1];
    let mut j = 0;
    for (o, &t) in out.iter_mut().zip(targets) {
        if t < first || t > last {
            *o = zero;
            continue;
        }
        while j + 1 < nodes.len() && nodes[j + 1] < t {
            j += 1;
        }
        if nodes[j] == t || j + 1 == nodes.len() {
            *o = values[j];
            continue;
        }
        let f = (t - nodes[j]) / (nodes[j + 1] - nodes[j]);
        *o = values[j] * (1.0 - f) + values[j + 1] * f;
    }
}

/// Resamples a pre-Stolt spectrum onto `nz` uniform kz samples spanning
/// `[sqrt(max(0, 4k_min² − kx_max² − ky_max²)), 2k_max]`.
///
/// If `required_extent` (m) exceeds the unambiguous z extent `2π/Δkz` of
/// the output grid, a warning is recorded on the result.
pub fn stolt_resample(
    spectrum: &KSpaceSpectrum,
    nz: usize,
    required_extent: Option<f64>,
) -> Result<KSpaceSpectrum> {
    if spectrum.stage != SpectrumStage::PreStolt {
        return Err(Error::InvalidSpectrum(
            "Stolt resampling needs a pre-Stolt spectrum".into(),
        ));
    }
    if nz < 2 {
        return Err(Error::InvalidParams(format!(
            "nz must be at least 2, got {nz}"
        )));
    }
    let k = &spectrum.third_axis;
    if k.is_empty() || k.windows(2).any(|w| !(w[1] > w[0])) || !(k[0] > 0.0) {
        return Err(Error::InvalidSpectrum(
            "wavenumber axis must be positive and strictly increasing".into(),
        ));
    }
    let (lo, hi) = kz_bounds(&spectrum.kx_axis, &spectrum.ky_axis, k[0], k[k.len() - 1]);
    let kz_axis = uniform_kz_axis(lo, hi, nz);
    let step = kz_axis[1] - kz_axis[0];

    let (nkx, nky, _) = spectrum.data.dim();
    let lanes: Vec<Vec<Complex64>> = (0..nkx * nky)
        .into_par_iter()
        .map(|bin| {
            let (ix, iy) = (bin / nky, bin % nky);
            let (kx, ky) = (spectrum.kx_axis[ix], spectrum.ky_axis[iy]);
            let source = spectrum.data.slice(s![ix, iy, ..]);
            let mut nodes = Vec::with_capacity(k.len());
            let mut values = Vec::with_capacity(k.len());
            for (kk, v) in k.iter().zip(source.iter()) {
                if let Some(kz) = dispersion_kz(kx, ky, *kk) {
                    nodes.push(kz);
                    values.push(*v);
                }
            }
            let mut out = vec![Complex64::new(0.0, 0.0); nz];
            interpolate_lane(&nodes, &values, &kz_axis, &mut out);
            out
        })
        .collect();

    let mut data = Array3::<Complex64>::zeros((nkx, nky, nz));
    for (bin, lane) in lanes.into_iter().enumerate() {
        let (ix, iy) = (bin / nky, bin % nky);
        data.slice_mut(s![ix, iy, ..])
            .iter_mut()
            .zip(lane)
            .for_each(|(d, v)| *d = v);
    }

    let mut warnings = spectrum.warnings.clone();
    let extent = 2.0 * PI / step;
    if let Some(required) = required_extent {
        if required > extent {
            warnings.push(format!(
                "nz = {nz} gives an unambiguous z extent of {extent:.4} m, \
                 less than the required {required:.4} m"
            ));
        }
    }

    Ok(KSpaceSpectrum {
        data,
        kx_axis: spectrum.kx_axis.clone(),
        ky_axis: spectrum.ky_axis.clone(),
        third_axis: kz_axis,
        stage: SpectrumStage::PostStolt,
        spacing: spectrum.spacing,
        origin: spectrum.origin,
        warnings,
    })
}

/// Multiplies every sample by `exp(−j·kz·z0)` and shifts the image z
/// origin by `−z0` to match.
pub fn apply_reference_phase(spectrum: &KSpaceSpectrum, z0: f64) -> Result<KSpaceSpectrum> {
    if spectrum.stage != SpectrumStage::PostStolt {
        return Err(Error::InvalidSpectrum(
            "reference phase needs a post-Stolt spectrum".into(),
        ));
    }
    let mut out = spectrum.clone();
    let phasors: Vec<Complex64> = spectrum
        .third_axis
        .iter()
        .map(|kz| Complex64::from_polar(1.0, -kz * z0))
        .collect();
    for mut lane in out.data.lanes_mut(Axis(2)) {
        lane.iter_mut().zip(&phasors).for_each(|(v, p)| *v *= p);
    }
    out.origin[2] -= z0;
    Ok(out)
}

/// Inverse 3D DFT (1/N per axis) of a post-Stolt spectrum.
pub fn inverse_fft_3d(spectrum: &KSpaceSpectrum) -> Result<ImageVolume> {
    if spectrum.stage != SpectrumStage::PostStolt {
        return Err(Error::InvalidSpectrum(
            "inverse 3D FFT needs a post-Stolt spectrum".into(),
        ));
    }
    let kz = &spectrum.third_axis;
    if kz.len() < 2 {
        return Err(Error::InvalidSpectrum(
            "kz axis needs at least two samples".into(),
        ));
    }
    let mut data = spectrum.data.clone();
    for axis in 0..3 {
        transform_axis(&mut data, axis, FftDirection::Inverse);
    }
    let dkz = kz[1] - kz[0];
    let dz = 2.0 * PI / (kz.len() as f64 * dkz);
    Ok(ImageVolume {
        data,
        spacing: [spectrum.spacing[0], spectrum.spacing[1], dz],
        origin: spectrum.origin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReconParams {
    pub nz: usize,
    pub zero_pad: [usize; 2],
    pub window: Window,
    /// Reference-phase distance; `None` means the aperture plane.
    pub z0: Option<f64>,
    /// Largest z offset from the image origin that must fit without
    /// wraparound; only used to raise a warning.
    pub z_extent: Option<f64>,
}

impl Default for ReconParams {
    fn default() -> Self {
        Self {
            nz: 256,
            zero_pad: [1, 1],
            window: Window::None,
            z0: None,
            z_extent: None,
        }
    }
}

/// Output of [`reconstruct`] with the parameters actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub volume: ImageVolume,
    /// Parameters with `z0` resolved.
    pub params: ReconParams,
    pub warnings: Vec<String>,
}

impl Reconstruction {
    /// `key: value` lines describing the run.
    pub fn params_text(&self) -> String {
        let p = &self.params;
        let v = &self.volume;
        let mut out = format!(
            "nz: {}\nzero_pad: {},{}\nwindow: {}\nz0_m: {}\nshape: {}x{}x{}\nspacing_m: {},{},{}\norigin_m: {},{},{}\n",
            p.nz,
            p.zero_pad[0],
            p.zero_pad[1],
            p.window.as_str(),
            p.z0.unwrap_or(0.0),
            v.shape()[0],
            v.shape()[1],
            v.shape()[2],
            v.spacing[0],
            v.spacing[1],
            v.spacing[2],
            v.origin[0],
            v.origin[1],
            v.origin[2],
        );
        for w in &self.warnings {
            out.push_str(&format!("warning: {w}\n"));
        }
        out
    }
}

/// Full range-migration reconstruction of a beat cube.
pub fn reconstruct(cube: &BeatCube, params: &ReconParams) -> Result<Reconstruction> {
    let grid = collapse_virtual_array(cube)?;
    let grid = apply_window(&grid, params.window);
    let spectrum = aperture_fft(&grid, params.zero_pad)?;
    let z0 = params.z0.unwrap_or(grid.z_plane);
    let spectrum = stolt_resample(&spectrum, params.nz, params.z_extent)?;
    let spectrum = apply_reference_phase(&spectrum, z0)?;
    let volume = inverse_fft_3d(&spectrum)?;
    Ok(Reconstruction {
        volume,
        params: ReconParams {
            z0: Some(z0),
            ..*params
        },
        warnings: spectrum.warnings,
    })
}
