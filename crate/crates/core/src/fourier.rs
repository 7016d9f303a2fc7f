//! Thin wrappers around `rustfft` with the unnormalized forward /
//! 1/n-normalized inverse convention.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse plans for one transform length.
#[derive(Clone)]
pub struct FftPair {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    scale: f64,
}

impl FftPair {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            scale: 1.0 / len as f64,
        }
    }

    pub fn forward(&mut self, buf: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, &mut self.scratch);
    }

    /// Inverse transform including the 1/n factor.
    pub fn inverse(&mut self, buf: &mut [Complex64]) {
        self.inverse.process_with_scratch(buf, &mut self.scratch);
        for x in buf.iter_mut() {
            *x *= self.scale;
        }
    }
}

pub fn forward(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    FftPair::new(buf.len()).forward(&mut buf);
    buf
}

pub fn inverse(input: &[Complex64]) -> Vec<Complex64> {
    let mut buf = input.to_vec();
    FftPair::new(buf.len()).inverse(&mut buf);
    buf
}
