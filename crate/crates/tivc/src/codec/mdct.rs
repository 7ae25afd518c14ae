//! Lapped transform frames: MDCT with a sine window at 50% overlap, which
//! reconstructs interior samples perfectly, so codec quality is governed
//! purely by quantization.

use ndarray::{Array1, Array2};

/// Basis and window for a fixed frame size.
pub struct Mdct {
    pub coeffs: usize,
    window: Array1<f64>,
    /// frame x coeffs cosine basis.
    basis: Array2<f64>,
}

impl Mdct {
    pub fn new(frame: usize) -> Mdct {
        assert!(frame.is_multiple_of(2));
        let m = frame / 2;
        let window = Array1::from_iter(
            (0..frame).map(|n| (std::f64::consts::PI / frame as f64 * (n as f64 + 0.5)).sin()),
        );
        let mut basis = Array2::zeros((frame, m));
        for n in 0..frame {
            for k in 0..m {
                basis[[n, k]] = (std::f64::consts::PI / m as f64
                    * (n as f64 + 0.5 + m as f64 / 2.0)
                    * (k as f64 + 0.5))
                    .cos();
            }
        }
        Mdct {
            coeffs: m,
            window,
            basis,
        }
    }

    /// Windowed frames -> coefficient rows. `frames` is (count x frame).
    pub fn forward(&self, frames: &Array2<f64>) -> Array2<f64> {
        let windowed = frames * &self.window;
        windowed.dot(&self.basis)
    }

    /// Coefficient rows -> windowed time-domain frames ready for overlap-add.
    pub fn inverse(&self, coeffs: &Array2<f64>) -> Array2<f64> {
        let frames = coeffs.dot(&self.basis.t());
        let scale = 2.0 / self.coeffs as f64;
        frames * &self.window * scale
    }
}

/// Slice a signal into 50%-overlapped frames; count = floor((n-frame)/hop)+1.
pub fn frame_signal(samples: &[f64], frame: usize, hop: usize) -> Array2<f64> {
    if samples.len() < frame {
        return Array2::zeros((0, frame));
    }
    let count = (samples.len() - frame) / hop + 1;
    let mut out = Array2::zeros((count, frame));
    for i in 0..count {
        for j in 0..frame {
            out[[i, j]] = samples[i * hop + j];
        }
    }
    out
}

/// Overlap-add windowed frames back into a signal of length
/// (count-1)*hop + frame.
pub fn overlap_add(frames: &Array2<f64>, hop: usize) -> Vec<f64> {
    let count = frames.nrows();
    if count == 0 {
        return Vec::new();
    }
    let frame = frames.ncols();
    let mut out = vec![0.0; (count - 1) * hop + frame];
    for i in 0..count {
        for j in 0..frame {
            out[i * hop + j] += frames[[i, j]];
        }
    }
    out
}
