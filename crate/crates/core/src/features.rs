//! Differential spectrum and the two classification features.
//!
//! The differential spectrum is `smooth(|R|) - smooth(|E|)`: negative bins
//! mean the object absorbed energy, positive bins mean it amplified. The
//! low-band feature is the dominant excursion in the low band; the high-band
//! feature is the least-squares slope across the high band.

use crate::error::{Error, Result};
use crate::material_sim::Trial;
use crate::signals::{dft_magnitude, uniform_filter, Spectrum};

const EDGE_TOLERANCE_BINS: f64 = 1e-9;

/// Closed frequency interval in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub lo_hz: f64,
    pub hi_hz: f64,
}

impl Band {
    pub const fn new(lo_hz: f64, hi_hz: f64) -> Self {
        Self { lo_hz, hi_hz }
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.lo_hz && f <= self.hi_hz
    }
}

impl std::fmt::Display for Band {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.lo_hz, self.hi_hz)
    }
}

impl std::str::FromStr for Band {
    type Err = Error;

    /// Parses `LO:HI`.
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::config(format!("band {s:?} is not of the form LO:HI")))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("band {s:?}: {v:?} is not a number")))
        };
        Ok(Band::new(parse(lo)?, parse(hi)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandConfig {
    pub low: Band,
    pub high: Band,
    pub filter_width_hz: f64,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self {
            low: Band::new(100.0, 400.0),
            high: Band::new(400.0, 800.0),
            filter_width_hz: 50.0,
        }
    }
}

impl BandConfig {
    /// Bands used for the PLA infill study: the high band narrows to 450–600 Hz.
    pub fn infill() -> Self {
        Self {
            high: Band::new(450.0, 600.0),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values = [
            self.low.lo_hz,
            self.low.hi_hz,
            self.high.lo_hz,
            self.high.hi_hz,
        ];
        let ordered = values.iter().all(|v| v.is_finite())
            && 0.0 <= self.low.lo_hz
            && self.low.lo_hz < self.low.hi_hz
            && self.low.hi_hz <= self.high.lo_hz
            && self.high.lo_hz < self.high.hi_hz;
        if !ordered {
            return Err(Error::config(format!(
                "bands must satisfy 0 <= low.lo < low.hi <= high.lo < high.hi, got low={} high={}",
                self.low, self.high
            )));
        }
        if !(self.filter_width_hz.is_finite() && self.filter_width_hz > 0.0) {
            return Err(Error::config(format!(
                "filter width must be positive, got {}",
                self.filter_width_hz
            )));
        }
        Ok(())
    }
}

/// Signed spectrum on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffSpectrum {
    values: Vec<f64>,
    bin_width_hz: f64,
}

impl DiffSpectrum {
    pub fn new(values: Vec<f64>, bin_width_hz: f64) -> Result<Self> {
        if values.is_empty() || !(bin_width_hz.is_finite() && bin_width_hz > 0.0) {
            return Err(Error::input(
                "differential spectrum needs bins and a positive bin width",
            ));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!("differential bin {k} is not finite")));
        }
        Ok(Self {
            values,
            bin_width_hz,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn bin_width_hz(&self) -> f64 {
        self.bin_width_hz
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn frequency_of(&self, bin: usize) -> f64 {
        bin as f64 * self.bin_width_hz
    }

    /// Inclusive bin range whose centres fall inside `band`.
    pub fn band_bins(&self, band: &Band) -> Result<std::ops::RangeInclusive<usize>> {
        let max_freq = self.frequency_of(self.len() - 1);
        let slack = EDGE_TOLERANCE_BINS * self.bin_width_hz;
        if !(band.lo_hz >= 0.0 && band.lo_hz <= band.hi_hz && band.hi_hz <= max_freq + slack) {
            return Err(Error::input(format!(
                "band {band} lies outside the spectrum grid [0, {max_freq}] Hz"
            )));
        }
        // Edges that land on a bin centre up to rounding count as inside.
        let first = (band.lo_hz / self.bin_width_hz - EDGE_TOLERANCE_BINS).ceil() as usize;
        let last = ((band.hi_hz / self.bin_width_hz + EDGE_TOLERANCE_BINS).floor() as usize)
            .min(self.len() - 1);
        if first > last {
            return Err(Error::input(format!("band {band} contains no bins")));
        }
        Ok(first..=last)
    }
}

/// `smooth(received) - smooth(emitted)` bin by bin.
pub fn differential_spectrum(
    emitted: &Spectrum,
    received: &Spectrum,
    filter_width_hz: f64,
) -> Result<DiffSpectrum> {
    if !emitted.same_grid(received) {
        return Err(Error::input(format!(
            "spectrum grids differ: {} bins @ {} Hz vs {} bins @ {} Hz",
            emitted.len(),
            emitted.bin_width_hz(),
            received.len(),
            received.bin_width_hz()
        )));
    }
    let e = uniform_filter(emitted, filter_width_hz)?;
    let r = uniform_filter(received, filter_width_hz)?;
    let values = r
        .magnitudes()
        .iter()
        .zip(e.magnitudes())
        .map(|(r, e)| r - e)
        .collect();
    DiffSpectrum::new(values, emitted.bin_width_hz())
}

/// Largest-magnitude bin in `band` as `(frequency, signed value)`.
/// Ties go to the lowest frequency.
pub fn low_band_peak(diff: &DiffSpectrum, band: &Band) -> Result<(f64, f64)> {
    let bins = diff.band_bins(band)?;
    if bins.clone().count() < 3 {
        return Err(Error::input(format!("band {band} holds fewer than 3 bins")));
    }
    let mut best = *bins.start();
    for k in bins {
        if diff.values[k].abs() > diff.values[best].abs() {
            best = k;
        }
    }
    Ok((diff.frequency_of(best), diff.values[best]))
}

/// Ordinary least-squares slope of differential value against frequency over `band`.
pub fn high_band_trend(diff: &DiffSpectrum, band: &Band) -> Result<f64> {
    let bins = diff.band_bins(band)?;
    let n = bins.clone().count();
    if n < 2 {
        return Err(Error::input(format!("band {band} holds fewer than 2 bins")));
    }
    let xs: Vec<f64> = bins.clone().map(|k| diff.frequency_of(k)).collect();
    let ys = &diff.values[bins];
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let (sxy, sxx) = xs.iter().zip(ys).fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        let dx = x - mean_x;
        (sxy + dx * (y - mean_y), sxx + dx * dx)
    });
    Ok(sxy / sxx)
}

/// Which scalar of a [`FeatureVector`] to use as a classification axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feature {
    PeakFreq,
    PeakMag,
    Slope,
}

impl Feature {
    pub const ALL: [Feature; 3] = [Feature::PeakFreq, Feature::PeakMag, Feature::Slope];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PeakFreq => "peak_freq",
            Feature::PeakMag => "peak_mag",
            Feature::Slope => "slope",
        }
    }
}

impl std::fmt::Display for Feature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Feature {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Feature::ALL
            .into_iter()
            .find(|f| f.name() == s.trim())
            .ok_or_else(|| {
                Error::config(format!(
                    "unknown feature {s:?}, expected one of peak_freq, peak_mag, slope"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector {
    pub low_peak_freq_hz: f64,
    /// Signed differential value at the low-band peak.
    pub low_peak_mag: f64,
    /// Differential units per Hz.
    pub high_trend_slope: f64,
}

impl FeatureVector {
    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::PeakFreq => self.low_peak_freq_hz,
            Feature::PeakMag => self.low_peak_mag,
            Feature::Slope => self.high_trend_slope,
        }
    }

    pub fn is_finite(&self) -> bool {
        Feature::ALL.iter().all(|&f| self.get(f).is_finite())
    }
}

/// Spectra computed for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpectra {
    pub emitted: Spectrum,
    pub received: Spectrum,
    pub differential: DiffSpectrum,
}

pub fn trial_spectra(t: &Trial, filter_width_hz: f64) -> Result<TrialSpectra> {
    let emitted = dft_magnitude(&t.emitted)?;
    let received = dft_magnitude(&t.received)?;
    let differential = differential_spectrum(&emitted, &received, filter_width_hz)?;
    Ok(TrialSpectra {
        emitted,
        received,
        differential,
    })
}

pub fn features_from_diff(diff: &DiffSpectrum, bands: &BandConfig) -> Result<FeatureVector> {
    let (low_peak_freq_hz, low_peak_mag) = low_band_peak(diff, &bands.low)?;
    let high_trend_slope = high_band_trend(diff, &bands.high)?;
    Ok(FeatureVector {
        low_peak_freq_hz,
        low_peak_mag,
        high_trend_slope,
    })
}

/// Transform, smooth, subtract, and read off both features.
pub fn extract_features(t: &Trial, bands: &BandConfig) -> Result<FeatureVector> {
    bands.validate()?;
    let spectra = trial_spectra(t, bands.filter_width_hz)?;
    features_from_diff(&spectra.differential, bands)
}
