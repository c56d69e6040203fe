use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid chirp: {0}")]
    InvalidChirp(String),

    #[error("invalid array layout: {0}")]
    InvalidLayout(String),

    #[error("invalid aperture scan: {0}")]
    InvalidScan(String),

    #[error(
        "scatterer {index} at z = {z} m is not in front of the aperture plane z = {z_plane} m"
    )]
    ScattererBehindAperture { index: usize, z: f64, z_plane: f64 },

    #[error("empty wavenumber axis")]
    EmptyWavenumberAxis,

    #[error("signal-to-noise ratio is undefined: {0}")]
    UndefinedSnr(String),

    #[error("phase centers do not form a uniform grid: {0}")]
    NonUniformGrid(String),

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("invalid reconstruction parameters: {0}")]
    InvalidParams(String),

    #[error("invalid voxel grid: {0}")]
    InvalidGrid(String),

    #[error("volume shapes differ: {a:?} vs {b:?}")]
    ShapeMismatch { a: [usize; 3], b: [usize; 3] },

    #[error("volume has zero norm")]
    ZeroNorm,

    #[error("z = {z} m is outside the volume extent [{lo}, {hi}] m")]
    OutOfExtent { z: f64, lo: f64, hi: f64 },

    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}
