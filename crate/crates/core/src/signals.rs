//! Time-domain synthesis and frequency-domain primitives.
//!
//! A [`Waveform`] is a uniformly sampled real series, a [`Spectrum`] is the
//! one-sided DFT magnitude of one. Chirps are linear sweeps with zero initial
//! phase; no analysis window is applied before the transform.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Default acquisition rate. Power of two, comfortably above twice the
/// 1 kHz ceiling of the widest sweep.
pub const DEFAULT_SAMPLE_RATE_HZ: f64 = 4096.0;

/// Minimum number of samples a chirp must span.
pub const MIN_CHIRP_SAMPLES: f64 = 16.0;

/// Uniformly sampled real-valued time series.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("waveform has no samples"));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::config(format!(
                "sample rate must be positive, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Root-mean-square amplitude.
    pub fn rms(&self) -> f64 {
        let sum_sq: f64 = self.samples.iter().map(|v| v * v).sum();
        (sum_sq / self.samples.len() as f64).sqrt()
    }
}

/// Linear frequency sweep parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChirpConfig {
    pub f_start_hz: f64,
    pub f_end_hz: f64,
    pub duration_s: f64,
    pub amplitude: f64,
    pub sample_rate_hz: f64,
}

impl Default for ChirpConfig {
    /// 100 to 800 Hz over 2 s at 4096 Hz, unit amplitude.
    fn default() -> Self {
        Self {
            f_start_hz: 100.0,
            f_end_hz: 800.0,
            duration_s: 2.0,
            amplitude: 1.0,
            sample_rate_hz: DEFAULT_SAMPLE_RATE_HZ,
        }
    }
}

impl ChirpConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("f_start_hz", self.f_start_hz),
            ("f_end_hz", self.f_end_hz),
            ("duration_s", self.duration_s),
            ("amplitude", self.amplitude),
            ("sample_rate_hz", self.sample_rate_hz),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(format!(
                    "chirp {name} must be positive and finite, got {value}"
                )));
            }
        }
        if self.f_end_hz < self.f_start_hz {
            return Err(Error::config(format!(
                "chirp end frequency {} Hz is below start frequency {} Hz",
                self.f_end_hz, self.f_start_hz
            )));
        }
        let nyquist = self.sample_rate_hz / 2.0;
        if self.f_end_hz >= nyquist {
            return Err(Error::config(format!(
                "chirp end frequency {} Hz is not below Nyquist ({nyquist} Hz)",
                self.f_end_hz
            )));
        }
        if self.duration_s * self.sample_rate_hz < MIN_CHIRP_SAMPLES {
            return Err(Error::config(format!(
                "chirp spans {} samples, need at least {MIN_CHIRP_SAMPLES}",
                self.duration_s * self.sample_rate_hz
            )));
        }
        Ok(())
    }

    pub fn num_samples(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize
    }
}

/// Generate a linear chirp with zero initial phase.
///
/// Sample `i` is `A * sin(2π (f0 t + (f1 - f0) t² / (2 T)))` with `t = i / fs`.
pub fn generate_chirp(config: &ChirpConfig) -> Result<Waveform> {
    config.validate()?;
    let n = config.num_samples();
    let sweep_rate = (config.f_end_hz - config.f_start_hz) / (2.0 * config.duration_s);
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / config.sample_rate_hz;
            let phase = 2.0 * PI * (config.f_start_hz * t + sweep_rate * t * t);
            config.amplitude * phase.sin()
        })
        .collect();
    Waveform::new(samples, config.sample_rate_hz)
}

/// One-sided magnitude spectrum; bin `k` is centered at `k * bin_width_hz`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    magnitudes: Vec<f64>,
    bin_width_hz: f64,
}

impl Spectrum {
    pub fn new(magnitudes: Vec<f64>, bin_width_hz: f64) -> Result<Self> {
        if magnitudes.is_empty() {
            return Err(Error::input("spectrum has no bins"));
        }
        if !(bin_width_hz.is_finite() && bin_width_hz > 0.0) {
            return Err(Error::input(format!(
                "bin width must be positive, got {bin_width_hz}"
            )));
        }
        if let Some(k) = magnitudes
            .iter()
            .position(|m| !(m.is_finite() && *m >= 0.0))
        {
            return Err(Error::input(format!(
                "bin {k} has invalid magnitude {}",
                magnitudes[k]
            )));
        }
        Ok(Self {
            magnitudes,
            bin_width_hz,
        })
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.bin_width_hz
    }

    pub fn len(&self) -> usize {
        self.magnitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.magnitudes.is_empty()
    }

    pub fn frequency_of(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_width_hz
    }

    pub fn same_grid(&self, other: &Spectrum) -> bool {
        self.len() == other.len() && self.bin_width_hz == other.bin_width_hz
    }
}

/// Full two-sided complex DFT, `X[k] = Σ x[n] e^{-2πikn/N}`.
pub fn dft(w: &Waveform) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = w
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    FftPlanner::new()
        .plan_fft_forward(buf.len())
        .process(&mut buf);
    buf
}

/// Inverse of [`dft`] including the `1/N` normalization; returns the real part.
pub fn inverse_dft_real(mut spectrum: Vec<Complex64>) -> Vec<f64> {
    let n = spectrum.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut spectrum);
    let scale = 1.0 / n as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

/// One-sided DFT magnitude (bins `0..=N/2`), no window, no zero padding.
pub fn dft_magnitude(w: &Waveform) -> Result<Spectrum> {
    if w.is_empty() {
        return Err(Error::input("cannot transform an empty waveform"));
    }
    let n = w.len();
    let full = dft(w);
    let magnitudes = full[..=n / 2].iter().map(|c| c.norm()).collect();
    Spectrum::new(magnitudes, w.sample_rate_hz() / n as f64)
}

/// Number of bins in a boxcar of `width_hz`: the largest odd count that fits, at least 1.
pub fn window_bins(width_hz: f64, bin_width_hz: f64) -> usize {
    let fit = (width_hz / bin_width_hz).floor();
    if !(fit >= 1.0) {
        return 1;
    }
    let fit = fit as usize;
    if fit % 2 == 0 {
        fit - 1
    } else {
        fit
    }
}

/// Centered moving average over the magnitude spectrum.
///
/// Edge bins average over the part of the window that lies inside the spectrum.
pub fn uniform_filter(s: &Spectrum, width_hz: f64) -> Result<Spectrum> {
    if !(width_hz.is_finite() && width_hz > 0.0) {
        return Err(Error::config(format!(
            "filter width must be positive, got {width_hz}"
        )));
    }
    let half = window_bins(width_hz, s.bin_width_hz()) / 2;
    Spectrum::new(boxcar(s.magnitudes(), half), s.bin_width_hz())
}

pub(crate) fn boxcar(values: &[f64], half: usize) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|k| {
            let lo = k.saturating_sub(half);
            let hi = (k + half).min(n - 1);
            let window = &values[lo..=hi];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}
