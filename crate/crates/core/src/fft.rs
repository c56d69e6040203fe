//! Axis-wise complex FFTs on 3D arrays.
//!
//! Forward transforms are unnormalized; inverse transforms scale by `1/N`
//! per axis so `inverse(forward(x)) == x`.

use ndarray::{Array3, Axis};
use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

pub(crate) fn transform_axis(data: &mut Array3<Complex64>, axis: usize, direction: FftDirection) {
    let len = data.len_of(Axis(axis));
    if len <= 1 {
        return;
    }
    let fft = FftPlanner::new().plan_fft(len, direction);
    let zero = Complex64::new(0.0, 0.0);
    let mut buf = vec![zero; len];
    let mut scratch = vec![zero; fft.get_inplace_scratch_len()];
    let scale = match direction {
        FftDirection::Forward => 1.0,
        FftDirection::Inverse => 1.0 / len as f64,
    };
    for mut lane in data.lanes_mut(Axis(axis)) {
        buf.iter_mut().zip(lane.iter()).for_each(|(b, v)| *b = *v);
        fft.process_with_scratch(&mut buf, &mut scratch);
        lane.iter_mut().zip(&buf).for_each(|(v, b)| *v = *b * scale);
    }
}

pub fn forward_3d(data: &Array3<Complex64>) -> Array3<Complex64> {
    let mut out = data.clone();
    for axis in 0..3 {
        transform_axis(&mut out, axis, FftDirection::Forward);
    }
    out
}

pub fn inverse_3d(data: &Array3<Complex64>) -> Array3<Complex64> {
    let mut out = data.clone();
    for axis in 0..3 {
        transform_axis(&mut out, axis, FftDirection::Inverse);
    }
    out
}

/// DFT bin frequencies in cycles per sample, natural (unshifted) order.
pub fn bin_frequencies(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i <= (n.saturating_sub(1)) / 2 {
                i as f64 / n as f64
            } else {
                (i as f64 - n as f64) / n as f64
            }
        })
        .collect()
}
