use ndarray::Array3;
use num_complex::Complex64;

/// Complex reflectivity on a uniform voxel grid, indexed `[ix][iy][iz]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageVolume {
    pub data: Array3<Complex64>,
    /// Voxel pitch `(Δx, Δy, Δz)` in metres.
    pub spacing: [f64; 3],
    /// Position of voxel `(0, 0, 0)` in metres.
    pub origin: [f64; 3],
}

impl ImageVolume {
    pub fn shape(&self) -> [usize; 3] {
        let s = self.data.shape();
        [s[0], s[1], s[2]]
    }

    pub fn voxel_position(&self, index: [usize; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.origin[a] + index[a] as f64 * self.spacing[a])
    }

    /// Index of the voxel nearest `position`, or `None` outside the grid.
    pub fn nearest_index(&self, position: [f64; 3]) -> Option<[usize; 3]> {
        let shape = self.shape();
        let mut out = [0usize; 3];
        for a in 0..3 {
            let f = ((position[a] - self.origin[a]) / self.spacing[a]).round();
            if !(f >= 0.0 && f < shape[a] as f64) {
                return None;
            }
            out[a] = f as usize;
        }
        Some(out)
    }

    pub fn magnitude(&self) -> Array3<f64> {
        self.data.mapv(|v| v.norm())
    }

    /// Index of the largest-magnitude voxel; the first in C order on ties.
    pub fn argmax(&self) -> [usize; 3] {
        let mut best = (f64::NEG_INFINITY, [0usize; 3]);
        for ((i, j, k), v) in self.data.indexed_iter() {
            let m = v.norm();
            if m > best.0 {
                best = (m, [i, j, k]);
            }
        }
        best.1
    }

    pub fn max_magnitude(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// z coordinate of every plane.
    pub fn z_axis(&self) -> Vec<f64> {
        (0..self.shape()[2])
            .map(|k| self.origin[2] + k as f64 * self.spacing[2])
            .collect()
    }
}
