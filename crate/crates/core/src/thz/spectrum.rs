//! Discrete spectra: the analytic signal (for envelopes) and one-sided
//! power spectra.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::ThzWaveform;

/// Analytic signal of a real trace via the discrete spectral method: FFT
/// after zero-padding to the next power of two, negative frequencies
/// zeroed, positive frequencies doubled (DC and Nyquist kept), inverse
/// FFT, truncated back to the input length.
///
/// The real part reproduces the input and the magnitude is the envelope,
/// which bounds the input pointwise.
pub fn analytic_signal(samples: &[f64]) -> Vec<Complex<f64>> {
    let n = samples.len();
    if n == 0 {
        return Vec::new();
    }
    let m = n.next_power_of_two();
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex<f64>> = samples
        .iter()
        .map(|&x| Complex::new(x, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(m)
        .collect();
    planner.plan_fft_forward(m).process(&mut buf);
    for (k, value) in buf.iter_mut().enumerate() {
        if k == 0 || 2 * k == m {
            continue;
        } else if 2 * k < m {
            *value *= 2.0;
        } else {
            *value = Complex::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(m).process(&mut buf);
    buf.truncate(n);
    let scale = 1.0 / m as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// One-sided power spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Bin frequencies `k / (N dt)`, Hz, for `k = 0..=N/2`.
    pub frequencies: Vec<f64>,
    /// Spectral power per bin; integrated against the bin width it equals
    /// the trace energy (Parseval).
    pub power: Vec<f64>,
}

impl Spectrum {
    /// Frequency spacing between bins, Hz.
    pub fn bin_width(&self) -> f64 {
        if self.frequencies.len() > 1 {
            self.frequencies[1] - self.frequencies[0]
        } else {
            0.0
        }
    }

    /// Frequency of the strongest bin.
    pub fn peak_frequency(&self) -> f64 {
        self.frequencies[self
            .power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)]
    }

    /// `sum(power) * bin_width`: the trace energy by Parseval.
    pub fn integrated_power(&self) -> f64 {
        self.power.iter().sum::<f64>() * self.bin_width()
    }
}

/// One-sided power spectrum of a waveform, with the DFT scaled by `dt` so
/// that `sum |x|^2 dt = sum power * df` holds exactly up to rounding.
pub fn power_spectrum(trace: &ThzWaveform) -> Spectrum {
    let samples = trace.samples();
    let n = samples.len();
    let dt = trace.dt();
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt);
    let bins = n / 2 + 1;
    let mut frequencies = Vec::with_capacity(bins);
    let mut power = Vec::with_capacity(bins);
    for (k, value) in buf.iter().take(bins).enumerate() {
        // Interior bins absorb their negative-frequency mirrors.
        let double = k != 0 && !(n.is_multiple_of(2) && k == n / 2);
        let weight = if double { 2.0 } else { 1.0 };
        frequencies.push(k as f64 * df);
        power.push(weight * (value * dt).norm_sqr());
    }
    Spectrum { frequencies, power }
}
