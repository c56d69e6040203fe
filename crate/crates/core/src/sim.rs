//! Forward model: beat-signal synthesis for point-scatterer scenes.
//!
//! Each sample of the cube is `Σ p·exp(+j·k·(R_T + R_R))` over the scene,
//! evaluated independently per scan position, virtual channel and
//! wavenumber. Reconstruction applies the conjugate phase.

use ndarray::{Array4, Axis};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{ApertureScan, ArrayLayout, ArrayMode, ChirpConfig};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointScatterer {
    pub position: [f64; 3],
    pub reflectivity: Complex64,
}

impl PointScatterer {
    pub fn new(position: [f64; 3], reflectivity: Complex64) -> Self {
        Self {
            position,
            reflectivity,
        }
    }

    pub fn unit(position: [f64; 3]) -> Self {
        Self::new(position, Complex64::new(1.0, 0.0))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scene {
    pub scatterers: Vec<PointScatterer>,
}

impl Scene {
    pub fn new(scatterers: Vec<PointScatterer>) -> Self {
        Self { scatterers }
    }

    pub fn union(&self, other: &Scene) -> Scene {
        let mut scatterers = self.scatterers.clone();
        scatterers.extend_from_slice(&other.scatterers);
        Scene { scatterers }
    }

    pub fn scaled(&self, factor: Complex64) -> Scene {
        Scene {
            scatterers: self
                .scatterers
                .iter()
                .map(|s| PointScatterer::new(s.position, s.reflectivity * factor))
                .collect(),
        }
    }
}

/// Sampled beat signal, indexed `[ix_scan][iy_scan][channel][sample]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatCube {
    pub data: Array4<Complex64>,
    pub chirp: ChirpConfig,
    pub scan: ApertureScan,
    pub layout: ArrayLayout,
}

impl BeatCube {
    /// Checks that the array shape matches the attached geometry.
    pub fn validate(&self) -> Result<()> {
        self.chirp.validate()?;
        self.scan.validate()?;
        self.layout.validate()?;
        let expected = [
            self.scan.nx,
            self.scan.ny,
            self.layout.channel_count(),
            self.chirp.n_samples,
        ];
        if self.data.shape() != expected {
            return Err(Error::Format(format!(
                "cube shape {:?} does not match geometry {:?}",
                self.data.shape(),
                expected
            )));
        }
        Ok(())
    }

    /// Mean of `|s|²` over every sample.
    pub fn mean_power(&self) -> f64 {
        let n = self.data.len();
        if n == 0 {
            return 0.0;
        }
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64
    }

    /// Absolute Tx and Rx positions used by the forward model for a scan
    /// position and channel. In monostatic mode both are the phase centre.
    pub fn element_positions(&self, ix: usize, iy: usize, ch: usize) -> ([f64; 3], [f64; 3]) {
        element_positions(&self.scan, &self.layout, ix, iy, ch)
    }
}

pub(crate) fn element_positions(
    scan: &ApertureScan,
    layout: &ArrayLayout,
    ix: usize,
    iy: usize,
    ch: usize,
) -> ([f64; 3], [f64; 3]) {
    let base = scan.position(ix, iy);
    let (tx, rx) = layout.channel_pair(ch);
    match layout.mode {
        ArrayMode::Bistatic => (
            [base[0] + tx[0], base[1] + tx[1], base[2]],
            [base[0] + rx[0], base[1] + rx[1], base[2]],
        ),
        ArrayMode::Monostatic => {
            let mid = [
                base[0] + (tx[0] + rx[0]) / 2.0,
                base[1] + (tx[1] + rx[1]) / 2.0,
                base[2],
            ];
            (mid, mid)
        }
    }
}

pub(crate) fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let d = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SimOptions {
    /// Weight each echo by `1/(R_T·R_R)`.
    pub spreading: bool,
}

/// Synthesizes the beat cube for `scene` over the full synthetic aperture.
pub fn simulate_beat(
    scene: &Scene,
    chirp: &ChirpConfig,
    scan: &ApertureScan,
    layout: &ArrayLayout,
) -> Result<BeatCube> {
    simulate_beat_with(scene, chirp, scan, layout, SimOptions::default())
}

pub fn simulate_beat_with(
    scene: &Scene,
    chirp: &ChirpConfig,
    scan: &ApertureScan,
    layout: &ArrayLayout,
    options: SimOptions,
) -> Result<BeatCube> {
    chirp.validate()?;
    let k_axis = chirp.wavenumber_axis();
    let data = simulate_on_axis(scene, &k_axis, scan, layout, options)?;
    Ok(BeatCube {
        data,
        chirp: *chirp,
        scan: *scan,
        layout: layout.clone(),
    })
}

/// Forward model on an explicit wavenumber axis.
pub fn simulate_on_axis(
    scene: &Scene,
    k_axis: &[f64],
    scan: &ApertureScan,
    layout: &ArrayLayout,
    options: SimOptions,
) -> Result<Array4<Complex64>> {
    if k_axis.is_empty() {
        return Err(Error::EmptyWavenumberAxis);
    }
    scan.validate()?;
    layout.validate()?;
    let z_plane = scan.z_plane();
    for (index, s) in scene.scatterers.iter().enumerate() {
        if !(s.position[2] > z_plane) {
            return Err(Error::ScattererBehindAperture {
                index,
                z: s.position[2],
                z_plane,
            });
        }
    }

    let n_ch = layout.channel_count();
    let mut data = Array4::<Complex64>::zeros((scan.nx, scan.ny, n_ch, k_axis.len()));
    data.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(ix, mut plane)| {
            for iy in 0..scan.ny {
                for ch in 0..n_ch {
                    let (tx, rx) = element_positions(scan, layout, ix, iy, ch);
                    let mut lane = plane.slice_mut(ndarray::s![iy, ch, ..]);
                    for s in &scene.scatterers {
                        let r_t = distance(&tx, &s.position);
                        let r_r = distance(&rx, &s.position);
                        let path = r_t + r_r;
                        let amp = if options.spreading {
                            s.reflectivity / (r_t * r_r)
                        } else {
                            s.reflectivity
                        };
                        for (v, &k) in lane.iter_mut().zip(k_axis) {
                            *v += amp * Complex64::from_polar(1.0, k * path);
                        }
                    }
                }
            }
        });
    Ok(data)
}

/// Adds seeded circularly-symmetric complex white Gaussian noise so that the
/// mean signal power over noise power equals `10^(snr_db/10)`.
///
/// `snr_db = +∞` returns the cube unchanged. The generator is ChaCha20
/// seeded with `seed`; real and imaginary parts are independent
/// `N(0, σ²/2)` draws taken in C order of the cube.
pub fn add_noise(cube: &BeatCube, snr_db: f64, seed: u64) -> Result<BeatCube> {
    if snr_db == f64::INFINITY {
        return Ok(cube.clone());
    }
    if !snr_db.is_finite() {
        return Err(Error::UndefinedSnr(format!("snr_db = {snr_db}")));
    }
    let signal_power = cube.mean_power();
    if !(signal_power > 0.0) {
        return Err(Error::UndefinedSnr("cube has no signal energy".into()));
    }
    let noise_power = signal_power / 10f64.powf(snr_db / 10.0);
    let normal = Normal::new(0.0, (noise_power / 2.0).sqrt())
        .map_err(|e| Error::UndefinedSnr(e.to_string()))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = cube.clone();
    for v in out.data.iter_mut() {
        let re = normal.sample(&mut rng);
        let im = normal.sample(&mut rng);
        *v += Complex64::new(re, im);
    }
    Ok(out)
}
