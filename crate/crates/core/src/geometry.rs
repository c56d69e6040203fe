//! Waveform, array and aperture geometry.
//!
//! Everything downstream works in the wavenumber domain: a fast-time sample
//! `n` of an FMCW chirp sits at instantaneous frequency `f0 + K·n/fs`, which
//! maps to the wavenumber `k = 2πf/c`. The virtual array is the set of
//! Tx/Rx midpoints, enumerated Tx-major (the TDM firing order).

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Vacuum speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Start frequency of the reference 77 GHz waveform (Hz).
pub const REFERENCE_F0_HZ: f64 = 77.0e9;
/// Swept span covered by the sampled window, 77 to 80.5 GHz (Hz).
pub const REFERENCE_SPAN_HZ: f64 = 3.5e9;
/// Chirp rate of the reference waveform, 70.295 MHz/µs (Hz/s).
pub const REFERENCE_SLOPE_HZ_PER_S: f64 = 70.295e12;
/// Chirp duration of the reference waveform (s).
pub const REFERENCE_T_CHIRP_S: f64 = 56.0e-6;

/// FMCW chirp parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpConfig {
    /// Start frequency (Hz).
    pub f0: f64,
    /// Chirp rate K (Hz/s).
    pub slope_k: f64,
    /// Chirp duration (s).
    pub t_chirp: f64,
    /// Fast-time samples per chirp.
    pub n_samples: usize,
    /// ADC sampling rate (Hz).
    pub f_sample: f64,
    /// Propagation speed (m/s).
    pub c: f64,
}

impl ChirpConfig {
    pub fn new(
        f0: f64,
        slope_k: f64,
        t_chirp: f64,
        n_samples: usize,
        f_sample: f64,
    ) -> Result<Self> {
        let chirp = Self {
            f0,
            slope_k,
            t_chirp,
            n_samples,
            f_sample,
            c: SPEED_OF_LIGHT,
        };
        chirp.validate()?;
        Ok(chirp)
    }

    /// The 77 GHz reference waveform: K = 70.295 MHz/µs, T = 56 µs, with the
    /// sampling rate chosen so the sampled window spans exactly 77 to 80.5 GHz.
    ///
    /// The sampled window (≈49.8 µs for large `n_samples`) is shorter than
    /// the chirp, since K·T would sweep ≈3.94 GHz. Needs `n_samples ≥ 9` to
    /// fit inside 56 µs.
    pub fn reference(n_samples: usize) -> Result<Self> {
        if n_samples < 2 {
            return Err(Error::InvalidChirp(format!(
                "n_samples must be at least 2, got {n_samples}"
            )));
        }
        let f_sample = REFERENCE_SLOPE_HZ_PER_S * (n_samples - 1) as f64 / REFERENCE_SPAN_HZ;
        Self::new(
            REFERENCE_F0_HZ,
            REFERENCE_SLOPE_HZ_PER_S,
            REFERENCE_T_CHIRP_S,
            n_samples,
            f_sample,
        )
    }

    pub fn with_speed(mut self, c: f64) -> Result<Self> {
        self.c = c;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidChirp(msg));
        if !(self.f0.is_finite() && self.f0 > 0.0) {
            return fail(format!("f0 must be positive, got {}", self.f0));
        }
        if !(self.slope_k.is_finite() && self.slope_k > 0.0) {
            return fail(format!("slope must be positive, got {}", self.slope_k));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return fail(format!(
                "propagation speed must be positive, got {}",
                self.c
            ));
        }
        if !(self.f_sample.is_finite() && self.f_sample > 0.0) {
            return fail(format!(
                "sampling rate must be positive, got {}",
                self.f_sample
            ));
        }
        if self.n_samples < 2 {
            return fail(format!(
                "n_samples must be at least 2, got {} (zero bandwidth)",
                self.n_samples
            ));
        }
        let window = self.n_samples as f64 / self.f_sample;
        // Relative slack so configs written with rounded decimal rates still pass.
        if !(self.t_chirp.is_finite() && window <= self.t_chirp * (1.0 + 1e-12)) {
            return fail(format!(
                "sampling window {window:e} s exceeds chirp duration {:e} s",
                self.t_chirp
            ));
        }
        if self.bandwidth() <= 0.0 {
            return fail("bandwidth must be positive".into());
        }
        Ok(())
    }

    /// Sampled bandwidth `K·(n−1)/fs` (Hz).
    pub fn bandwidth(&self) -> f64 {
        self.slope_k * (self.n_samples.saturating_sub(1)) as f64 / self.f_sample
    }

    /// Wavelength at the start frequency (m).
    pub fn wavelength(&self) -> f64 {
        self.c / self.f0
    }

    pub fn bandwidth_and_wavelength(&self) -> (f64, f64) {
        (self.bandwidth(), self.wavelength())
    }

    /// Instantaneous frequency of fast-time sample `n`.
    pub fn frequency(&self, n: usize) -> f64 {
        self.f0 + self.slope_k * n as f64 / self.f_sample
    }

    /// `k_n = 2π(f0 + K·n/fs)/c` for every fast-time sample.
    pub fn wavenumber_axis(&self) -> Vec<f64> {
        (0..self.n_samples)
            .map(|n| 2.0 * PI * self.frequency(n) / self.c)
            .collect()
    }
}

/// How the forward model and the oracle treat a Tx/Rx pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArrayMode {
    /// Exact two-way path from the physical Tx and Rx positions.
    Bistatic,
    /// Both legs measured from the Tx/Rx midpoint.
    Monostatic,
}

impl ArrayMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ArrayMode::Bistatic => "bistatic",
            ArrayMode::Monostatic => "monostatic",
        }
    }
}

/// Transmitter and receiver offsets relative to the sensor reference point.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayLayout {
    pub tx_offsets: Vec<[f64; 2]>,
    pub rx_offsets: Vec<[f64; 2]>,
    pub mode: ArrayMode,
}

impl ArrayLayout {
    pub fn new(
        tx_offsets: Vec<[f64; 2]>,
        rx_offsets: Vec<[f64; 2]>,
        mode: ArrayMode,
    ) -> Result<Self> {
        let layout = Self {
            tx_offsets,
            rx_offsets,
            mode,
        };
        layout.validate()?;
        Ok(layout)
    }

    /// A single collocated transceiver at the reference point.
    pub fn single() -> Self {
        Self {
            tx_offsets: vec![[0.0, 0.0]],
            rx_offsets: vec![[0.0, 0.0]],
            mode: ArrayMode::Monostatic,
        }
    }

    /// A linear MIMO array along y whose `n_tx·n_rx` midpoints are evenly
    /// spaced by `pitch` and centred on the reference point.
    ///
    /// Receivers sit `2·pitch` apart and transmitters `2·n_rx·pitch` apart,
    /// which interleaves the virtual channels without overlap.
    pub fn uniform_line(n_tx: usize, n_rx: usize, pitch: f64, mode: ArrayMode) -> Result<Self> {
        let n_virtual = n_tx * n_rx;
        let centre = (n_virtual as f64 - 1.0) * pitch / 2.0;
        let rx = (0..n_rx).map(|r| [0.0, 2.0 * pitch * r as f64]).collect();
        let tx = (0..n_tx)
            .map(|t| [0.0, 2.0 * pitch * (n_rx * t) as f64 - 2.0 * centre])
            .collect();
        Self::new(tx, rx, mode)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tx_offsets.is_empty() || self.rx_offsets.is_empty() {
            return Err(Error::InvalidLayout(
                "at least one transmitter and one receiver are required".into(),
            ));
        }
        let finite = |p: &[f64; 2]| p[0].is_finite() && p[1].is_finite();
        if !self.tx_offsets.iter().chain(&self.rx_offsets).all(finite) {
            return Err(Error::InvalidLayout("non-finite element offset".into()));
        }
        Ok(())
    }

    pub fn channel_count(&self) -> usize {
        self.tx_offsets.len() * self.rx_offsets.len()
    }

    /// Tx and Rx offsets of virtual channel `ch` (Tx-major).
    pub fn channel_pair(&self, ch: usize) -> ([f64; 2], [f64; 2]) {
        let n_rx = self.rx_offsets.len();
        (self.tx_offsets[ch / n_rx], self.rx_offsets[ch % n_rx])
    }

    /// Midpoint phase centres of every Tx/Rx pair, Tx-major.
    pub fn virtual_channels(&self) -> Vec<[f64; 2]> {
        self.tx_offsets
            .iter()
            .flat_map(|t| {
                self.rx_offsets
                    .iter()
                    .map(move |r| [(t[0] + r[0]) / 2.0, (t[1] + r[1]) / 2.0])
            })
            .collect()
    }
}

/// A raster of sensor positions on the plane `z = origin[2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApertureScan {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    /// First scan position; its z component is the aperture plane.
    pub origin: [f64; 3],
}

impl ApertureScan {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: [f64; 3]) -> Result<Self> {
        let scan = Self {
            nx,
            ny,
            dx,
            dy,
            origin,
        };
        scan.validate()?;
        Ok(scan)
    }

    /// A scan centred on the z axis at `z_plane`.
    pub fn centered(nx: usize, ny: usize, dx: f64, dy: f64, z_plane: f64) -> Result<Self> {
        let origin = [
            -(nx.saturating_sub(1) as f64) * dx / 2.0,
            -(ny.saturating_sub(1) as f64) * dy / 2.0,
            z_plane,
        ];
        Self::new(nx, ny, dx, dy, origin)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidScan(format!(
                "scan counts must be at least 1, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.dx.is_finite() && self.dx > 0.0 && self.dy.is_finite() && self.dy > 0.0) {
            return Err(Error::InvalidScan(format!(
                "scan steps must be positive, got dx={} dy={}",
                self.dx, self.dy
            )));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidScan("non-finite origin".into()));
        }
        Ok(())
    }

    pub fn z_plane(&self) -> f64 {
        self.origin[2]
    }

    /// Aperture extents `(Dx, Dy)`.
    pub fn extent(&self) -> (f64, f64) {
        (
            (self.nx - 1) as f64 * self.dx,
            (self.ny - 1) as f64 * self.dy,
        )
    }

    pub fn position(&self, ix: usize, iy: usize) -> [f64; 3] {
        [
            self.origin[0] + ix as f64 * self.dx,
            self.origin[1] + iy as f64 * self.dy,
            self.origin[2],
        ]
    }
}
