//! Multi-dimensional complex FFTs on cubic lattices, done axis by axis.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Unnormalized transforms of an `n^dim` lattice stored row-major.
#[derive(Clone)]
pub struct CubeFft {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for CubeFft {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CubeFft")
            .field("dim", &self.dim)
            .field("n", &self.n)
            .finish()
    }
}

impl CubeFft {
    pub fn new(dim: usize, n: usize) -> CubeFft {
        let mut planner = FftPlanner::new();
        CubeFft {
            dim,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// In-place transform. No normalization is applied in either direction.
    pub fn process(&self, data: &mut [Complex64], dir: Direction) {
        assert_eq!(data.len(), self.len(), "lattice size mismatch");
        let fft = match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        };
        let n = self.n;
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        if self.dim == 1 {
            return;
        }
        let mut buf = vec![Complex64::default(); self.len()];
        for axis in 0..self.dim - 1 {
            let inner = n.pow((self.dim - 1 - axis) as u32);
            let block = n * inner;
            for (src, dst) in data.chunks_exact_mut(block).zip(buf.chunks_exact_mut(block)) {
                transpose(src, dst, n, inner);
                fft.process_with_scratch(dst, &mut scratch);
                transpose(dst, src, inner, n);
            }
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    const TILE: usize = 16;
    for r0 in (0..rows).step_by(TILE) {
        for c0 in (0..cols).step_by(TILE) {
            for r in r0..(r0 + TILE).min(rows) {
                for c in c0..(c0 + TILE).min(cols) {
                    dst[c * rows + r] = src[r * cols + c];
                }
            }
        }
    }
}
