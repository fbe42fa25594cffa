//! Three-dimensional complex FFT on an `M³` grid, x-fastest layout.

use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

#[derive(Clone)]
pub struct Fft3<T: Real> {
    m: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> std::fmt::Debug for Fft3<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("m", &self.m).finish()
    }
}

impl<T: Real> Fft3<T> {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        }
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// `X(m) = Σ_g f_g e^{−i m·x_g}`, unnormalized.
    pub fn forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &*self.forward);
    }

    /// `f_g = Σ_m X(m) e^{i m·x_g}`, unnormalized.
    pub fn inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &*self.inverse);
    }

    pub fn forward_real(&self, f: &[T]) -> Vec<Complex<T>> {
        let mut data: Vec<_> = f.iter().map(|&x| Complex::new(x, T::zero())).collect();
        self.forward(&mut data);
        data
    }

    /// Inverse transform keeping the real part; the spectrum is assumed
    /// Hermitian so the imaginary part is rounding noise.
    pub fn inverse_real(&self, mut spectrum: Vec<Complex<T>>) -> Vec<T> {
        self.inverse(&mut spectrum);
        spectrum.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, data: &mut [Complex<T>], plan: &dyn Fft<T>) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m, "grid size mismatch");
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); plan.get_inplace_scratch_len()];
        // x: contiguous lines
        plan.process_with_scratch(data, &mut scratch);
        let mut lines = vec![Complex::new(T::zero(), T::zero()); m * m];
        // y
        for k in 0..m {
            let plane = &mut data[k * m * m..(k + 1) * m * m];
            for j in 0..m {
                for i in 0..m {
                    lines[i * m + j] = plane[i + m * j];
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for j in 0..m {
                for i in 0..m {
                    plane[i + m * j] = lines[i * m + j];
                }
            }
        }
        // z
        for j in 0..m {
            for k in 0..m {
                for i in 0..m {
                    lines[i * m + k] = data[i + m * (j + m * k)];
                }
            }
            plan.process_with_scratch(&mut lines, &mut scratch);
            for k in 0..m {
                for i in 0..m {
                    data[i + m * (j + m * k)] = lines[i * m + k];
                }
            }
        }
    }
}
