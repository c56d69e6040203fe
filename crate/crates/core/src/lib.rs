//! FMCW MIMO-SAR simulation and 3D near-field imaging.
//!
//! - [`geometry`]: chirp, virtual array and scan raster.
//! - [`sim`]: beat-signal forward model and seeded noise.
//! - [`rma`]: range-migration reconstruction with Stolt resampling.
//! - [`backprojection`]: exact matched-filter imaging, the adjoint of [`sim`].
//! - [`analysis`]: PSF metrics, resolution formulas and range cuts.
//! - [`io`]: run configs, binary cube/volume formats and slice export.

// NaN-rejecting guards are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod backprojection;
pub mod error;
pub mod fft;
pub mod geometry;
pub mod io;
pub mod rma;
pub mod sim;
pub mod volume;

pub use error::{Error, Result};
pub use geometry::{ApertureScan, ArrayLayout, ArrayMode, ChirpConfig, SPEED_OF_LIGHT};
pub use rma::{reconstruct, ReconParams, Reconstruction, Window};
pub use sim::{add_noise, simulate_beat, BeatCube, PointScatterer, Scene};
pub use volume::ImageVolume;
