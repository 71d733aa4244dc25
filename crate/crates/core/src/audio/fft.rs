//! Thin wrappers over `rustfft` for real-valued signals.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Scalar;

/// Full-length complex spectrum of a real signal (unnormalized).
pub(crate) fn forward_real<T: Scalar>(x: &[T]) -> Vec<Complex<T>> {
    let mut buf: Vec<Complex<T>> = x.iter().map(|&v| Complex::new(v, T::zero())).collect();
    if buf.is_empty() {
        return buf;
    }
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

/// Inverse of [`forward_real`]: returns the real part divided by the length.
pub(crate) fn inverse_real<T: Scalar>(mut spec: Vec<Complex<T>>) -> Vec<T> {
    let n = spec.len();
    if n == 0 {
        return Vec::new();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let scale = T::from_len(n);
    spec.into_iter().map(|c| c.re / scale).collect()
}

/// Linear (non-circular) autocorrelation of equally sized frames, computed
/// through a zero-padded FFT. Plans are reused across frames.
pub(crate) struct Autocorrelator<T: Scalar> {
    size: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    buf: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> Autocorrelator<T> {
    pub(crate) fn new(max_frame: usize) -> Self {
        let size = (2 * max_frame.max(1)).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        Self {
            size,
            forward,
            inverse,
            buf: vec![Complex::new(T::zero(), T::zero()); size],
            scratch: vec![Complex::new(T::zero(), T::zero()); scratch_len],
        }
    }

    /// Writes `sum_n x[n] x[n+m]` for `m = 0..out.len()` into `out`.
    pub(crate) fn lagged_products(&mut self, x: &[T], out: &mut [T]) {
        assert!(2 * x.len() <= self.size, "frame longer than planned size");
        let zero = Complex::new(T::zero(), T::zero());
        for (slot, &v) in self.buf.iter_mut().zip(x.iter()) {
            *slot = Complex::new(v, T::zero());
        }
        for slot in self.buf[x.len()..].iter_mut() {
            *slot = zero;
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        for c in self.buf.iter_mut() {
            *c = Complex::new(c.norm_sqr(), T::zero());
        }
        self.inverse.process_with_scratch(&mut self.buf, &mut self.scratch);
        let scale = T::from_len(self.size);
        for (o, c) in out.iter_mut().zip(self.buf.iter()) {
            *o = c.re / scale;
        }
    }
}
