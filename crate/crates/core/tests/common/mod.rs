//! Independent oracles shared by the integration suites. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use num_complex::Complex64;
use sar3d_core::{ApertureScan, ArrayLayout, ArrayMode};

pub fn rel_err(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den.max(f64::MIN_POSITIVE)).sqrt()
}

/// Absolute Tx/Rx positions for every (scan position, channel) in
/// `[ix][iy][tx][rx]` order, written out from the raw geometry.
pub fn antenna_pairs(scan: &ApertureScan, layout: &ArrayLayout) -> Vec<([f64; 3], [f64; 3])> {
    let mut out = Vec::new();
    for ix in 0..scan.nx {
        for iy in 0..scan.ny {
            let bx = scan.origin[0] + ix as f64 * scan.dx;
            let by = scan.origin[1] + iy as f64 * scan.dy;
            let z = scan.origin[2];
            for t in &layout.tx_offsets {
                for r in &layout.rx_offsets {
                    let tx = [bx + t[0], by + t[1], z];
                    let rx = [bx + r[0], by + r[1], z];
                    match layout.mode {
                        ArrayMode::Bistatic => out.push((tx, rx)),
                        ArrayMode::Monostatic => {
                            let m = [(tx[0] + rx[0]) / 2.0, (tx[1] + rx[1]) / 2.0, z];
                            out.push((m, m));
                        }
                    }
                }
            }
        }
    }
    out
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Explicit forward matrix `A[m][v] = exp(+j·k·(R_T + R_R))` with rows in
/// cube C order (scan x, scan y, channel, sample).
pub fn forward_matrix(
    scan: &ApertureScan,
    layout: &ArrayLayout,
    k_axis: &[f64],
    points: &[[f64; 3]],
) -> Vec<Vec<Complex64>> {
    let mut rows = Vec::new();
    for (tx, rx) in antenna_pairs(scan, layout) {
        for &k in k_axis {
            rows.push(
                points
                    .iter()
                    .map(|p| {
                        let phase = k * (dist(tx, *p) + dist(rx, *p));
                        Complex64::new(phase.cos(), phase.sin())
                    })
                    .collect(),
            );
        }
    }
    rows
}

pub fn mat_vec(a: &[Vec<Complex64>], x: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

pub fn mat_h_vec(a: &[Vec<Complex64>], y: &[Complex64]) -> Vec<Complex64> {
    let cols = a[0].len();
    (0..cols)
        .map(|c| a.iter().zip(y).map(|(row, v)| row[c].conj() * v).sum())
        .collect()
}

/// Stolt reference: sample `f(k)` on a grid `oversample` times finer than
/// `k_axis`, map each fine sample to `kz = sqrt(4k² − kx² − ky²)` and
/// linearly interpolate onto `kz_targets` by direct bracket search. Targets
/// outside the fine support come back as zero.
pub fn fine_grid_stolt(
    f: &dyn Fn(f64) -> Complex64,
    k_axis: &[f64],
    kx: f64,
    ky: f64,
    kz_targets: &[f64],
    oversample: usize,
) -> Vec<Option<Complex64>> {
    let (k0, k1) = (k_axis[0], k_axis[k_axis.len() - 1]);
    let n = (k_axis.len() - 1) * oversample + 1;
    let mut nodes = Vec::new();
    for i in 0..n {
        let k = k0 + (k1 - k0) * i as f64 / (n - 1) as f64;
        let arg = 4.0 * k * k - kx * kx - ky * ky;
        if arg >= 0.0 {
            nodes.push((arg.sqrt(), f(k)));
        }
    }
    kz_targets
        .iter()
        .map(|&t| {
            if nodes.len() < 2 || t < nodes[0].0 || t > nodes[nodes.len() - 1].0 {
                return None;
            }
            for w in nodes.windows(2) {
                let ((a, va), (b, vb)) = (w[0], w[1]);
                if t >= a && t <= b {
                    let u = (t - a) / (b - a);
                    return Some(va + (vb - va) * u);
                }
            }
            None
        })
        .collect()
}
