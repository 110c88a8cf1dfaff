//! Shared FFT plumbing: a process-wide planner so repeated transforms of the
//! same size reuse their plan.

use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::sync::{Arc, Mutex};

static PLANNER: Lazy<Mutex<FftPlanner<f64>>> = Lazy::new(|| Mutex::new(FftPlanner::new()));

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER.lock().expect("fft planner poisoned");
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// DFT of real samples, normalized so `coeffs[0]` is the sample mean.
pub fn forward(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    plan(n, true).process(&mut buf);
    let scale = 1.0 / n as f64;
    for c in &mut buf {
        *c *= scale;
    }
    buf
}

/// Inverse of [`forward`]; the imaginary residue is discarded.
pub fn inverse(coeffs: &[Complex64]) -> Vec<f64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), false).process(&mut buf);
    buf.into_iter().map(|c| c.re).collect()
}
