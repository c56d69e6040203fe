//! Little-endian binary formats for beat cubes (`SARB`) and volumes (`SARV`).
//!
//! Beat cube, version 1:
//!
//! ```text
//! magic      4 bytes  "SARB"
//! version    u16
//! dims       4 × u32  nx, ny, channels, samples
//! chirp      5 × f64  f0, slope_k, t_chirp, f_sample, c
//! scan       5 × f64  dx, dy, origin x, y, z
//! mode       u8       0 = monostatic, 1 = bistatic
//! counts     2 × u32  n_tx, n_rx
//! offsets    (n_tx + n_rx) × 2 × f64   tx then rx, (x, y)
//! payload    nx·ny·channels·samples × (f32 re, f32 im), C order
//! ```
//!
//! Volume, version 1:
//!
//! ```text
//! magic      4 bytes  "SARV"
//! version    u16
//! dims       3 × u32  nx, ny, nz
//! spacing    3 × f64
//! origin     3 × f64
//! payload    nx·ny·nz × (f32 re, f32 im), C order (z fastest)
//! ```
//!
//! Samples are stored as `f32`, so writing rounds each component to the
//! nearest `f32`; anything read from a file writes back bit-for-bit.

use std::io::{Read, Write};

use ndarray::{Array3, Array4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ApertureScan, ArrayLayout, ArrayMode, ChirpConfig};
use crate::sim::BeatCube;
use crate::volume::ImageVolume;

pub const CUBE_MAGIC: &[u8; 4] = b"SARB";
pub const VOLUME_MAGIC: &[u8; 4] = b"SARV";
pub const FORMAT_VERSION: u16 = 1;

/// Refuse payloads larger than this many samples (16 GiB on disk).
const MAX_SAMPLES: u64 = 1 << 31;

fn put_u16(w: &mut impl Write, v: u16) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_u32(w: &mut impl Write, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")))?;
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_f64(w: &mut impl Write, v: f64) -> Result<()> {
    Ok(w.write_all(&v.to_le_bytes())?)
}

fn put_samples<'a>(w: &mut impl Write, samples: impl Iterator<Item = &'a Complex64>) -> Result<()> {
    let mut buf = Vec::with_capacity(8 * 4096);
    for v in samples {
        buf.extend_from_slice(&(v.re as f32).to_le_bytes());
        buf.extend_from_slice(&(v.im as f32).to_le_bytes());
        if buf.len() >= 8 * 4096 {
            w.write_all(&buf)?;
            buf.clear();
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

fn take<const N: usize>(r: &mut impl Read, what: &str) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => {
            Error::Format(format!("truncated while reading {what}"))
        }
        _ => Error::Io(e),
    })?;
    Ok(b)
}

fn get_u32(r: &mut impl Read, what: &str) -> Result<usize> {
    Ok(u32::from_le_bytes(take::<4>(r, what)?) as usize)
}

fn get_f64(r: &mut impl Read, what: &str) -> Result<f64> {
    Ok(f64::from_le_bytes(take::<8>(r, what)?))
}

fn check_header(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let found = take::<4>(r, "magic")?;
    if &found != magic {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&found),
            String::from_utf8_lossy(magic)
        )));
    }
    let version = u16::from_le_bytes(take::<2>(r, "version")?);
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

fn sample_count(dims: &[usize]) -> Result<usize> {
    let total = dims
        .iter()
        .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64))
        .filter(|&n| n <= MAX_SAMPLES)
        .ok_or_else(|| Error::Format(format!("dimensions {dims:?} overflow the sample limit")))?;
    Ok(total as usize)
}

fn get_samples(r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut bytes = vec![0u8; count * 8];
    r.read_exact(&mut bytes).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => {
            Error::Format(format!("truncated payload, expected {count} samples"))
        }
        _ => Error::Io(e),
    })?;
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect())
}

pub fn write_beat_cube(cube: &BeatCube, w: &mut impl Write) -> Result<()> {
    cube.validate()?;
    w.write_all(CUBE_MAGIC)?;
    put_u16(w, FORMAT_VERSION)?;
    for &d in cube.data.shape() {
        put_u32(w, d)?;
    }
    let c = &cube.chirp;
    for v in [c.f0, c.slope_k, c.t_chirp, c.f_sample, c.c] {
        put_f64(w, v)?;
    }
    let s = &cube.scan;
    for v in [s.dx, s.dy, s.origin[0], s.origin[1], s.origin[2]] {
        put_f64(w, v)?;
    }
    let l = &cube.layout;
    w.write_all(&[match l.mode {
        ArrayMode::Monostatic => 0u8,
        ArrayMode::Bistatic => 1u8,
    }])?;
    put_u32(w, l.tx_offsets.len())?;
    put_u32(w, l.rx_offsets.len())?;
    for p in l.tx_offsets.iter().chain(&l.rx_offsets) {
        put_f64(w, p[0])?;
        put_f64(w, p[1])?;
    }
    put_samples(w, cube.data.iter())
}

pub fn read_beat_cube(r: &mut impl Read) -> Result<BeatCube> {
    check_header(r, CUBE_MAGIC)?;
    let mut dims = [0usize; 4];
    for d in dims.iter_mut() {
        *d = get_u32(r, "dimensions")?;
    }
    let count = sample_count(&dims)?;
    let mut chirp_fields = [0.0; 5];
    for v in chirp_fields.iter_mut() {
        *v = get_f64(r, "chirp")?;
    }
    let [f0, slope_k, t_chirp, f_sample, c] = chirp_fields;
    let chirp = ChirpConfig {
        f0,
        slope_k,
        t_chirp,
        n_samples: dims[3],
        f_sample,
        c,
    };
    let mut scan_fields = [0.0; 5];
    for v in scan_fields.iter_mut() {
        *v = get_f64(r, "scan")?;
    }
    let scan = ApertureScan {
        nx: dims[0],
        ny: dims[1],
        dx: scan_fields[0],
        dy: scan_fields[1],
        origin: [scan_fields[2], scan_fields[3], scan_fields[4]],
    };
    let mode = match take::<1>(r, "mode")?[0] {
        0 => ArrayMode::Monostatic,
        1 => ArrayMode::Bistatic,
        m => return Err(Error::Format(format!("unknown array mode {m}"))),
    };
    let n_tx = get_u32(r, "tx count")?;
    let n_rx = get_u32(r, "rx count")?;
    if (n_tx as u64) * (n_rx as u64) != dims[2] as u64 {
        return Err(Error::Format(format!(
            "{n_tx} tx × {n_rx} rx does not match {} channels",
            dims[2]
        )));
    }
    let mut read_offsets = |n: usize| -> Result<Vec<[f64; 2]>> {
        (0..n)
            .map(|_| Ok([get_f64(r, "offsets")?, get_f64(r, "offsets")?]))
            .collect()
    };
    let tx = read_offsets(n_tx)?;
    let rx = read_offsets(n_rx)?;
    let layout = ArrayLayout {
        tx_offsets: tx,
        rx_offsets: rx,
        mode,
    };
    let samples = get_samples(r, count)?;
    let data = Array4::from_shape_vec((dims[0], dims[1], dims[2], dims[3]), samples)
        .map_err(|e| Error::Format(e.to_string()))?;
    let cube = BeatCube {
        data,
        chirp,
        scan,
        layout,
    };
    cube.validate()?;
    Ok(cube)
}

pub fn write_volume(volume: &ImageVolume, w: &mut impl Write) -> Result<()> {
    w.write_all(VOLUME_MAGIC)?;
    put_u16(w, FORMAT_VERSION)?;
    for d in volume.shape() {
        put_u32(w, d)?;
    }
    for v in volume.spacing.iter().chain(&volume.origin) {
        put_f64(w, *v)?;
    }
    put_samples(w, volume.data.iter())
}

pub fn read_volume(r: &mut impl Read) -> Result<ImageVolume> {
    check_header(r, VOLUME_MAGIC)?;
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        *d = get_u32(r, "dimensions")?;
    }
    let count = sample_count(&dims)?;
    let mut spacing = [0.0; 3];
    for v in spacing.iter_mut() {
        *v = get_f64(r, "spacing")?;
    }
    let mut origin = [0.0; 3];
    for v in origin.iter_mut() {
        *v = get_f64(r, "origin")?;
    }
    if !spacing.iter().all(|s| s.is_finite() && *s > 0.0) {
        return Err(Error::Format(format!("non-positive spacing {spacing:?}")));
    }
    let samples = get_samples(r, count)?;
    let data = Array3::from_shape_vec((dims[0], dims[1], dims[2]), samples)
        .map_err(|e| Error::Format(e.to_string()))?;
    Ok(ImageVolume {
        data,
        spacing,
        origin,
    })
}
