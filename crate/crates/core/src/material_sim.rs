//! Synthetic emitter/receiver rig.
//!
//! Objects are modelled as a zero-phase, frequency-dependent gain applied to
//! the clean chirp spectrum. The gain curve is parameterized by a stiffness
//! index derived from log10 of Young's modulus and scaled by infill fraction.
//! Its shape is calibrated so that:
//!
//! * soft objects (E ≤ 2 MPa) lose 30–50% of the 100–400 Hz amplitude,
//! * rigid objects (E ≥ 1000 MPa) gain amplitude over 400–800 Hz,
//! * gain over 450–600 Hz rises with infill,
//! * the deepest low-band absorption notch moves down in frequency as the
//!   material gets softer.
//!
//! Sensor noise is additive white Gaussian with an RNG stream keyed on
//! `(seed, material, trial index, sensor role)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::signals::{dft, generate_chirp, inverse_dft_real, ChirpConfig, Waveform};

/// Constant grip force held during every trial, in newtons. Metadata only.
pub const DEFAULT_GRIP_FORCE_N: f64 = 1.0;
pub const DEFAULT_SNR_DB: f64 = 20.0;
pub const DEFAULT_TRIALS: usize = 50;

/// PLA infill fractions of the infill study.
pub const PLA_INFILLS: [f64; 6] = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialSpec {
    name: String,
    youngs_modulus_mpa: f64,
    infill_fraction: f64,
}

impl MaterialSpec {
    /// Names must be non-empty and free of whitespace, commas and `=` so they
    /// can be embedded in the trial and model file formats unescaped.
    pub fn new(
        name: impl Into<String>,
        youngs_modulus_mpa: f64,
        infill_fraction: f64,
    ) -> Result<Self> {
        let name = name.into();
        validate_label(&name)?;
        if !(youngs_modulus_mpa.is_finite() && youngs_modulus_mpa > 0.0) {
            return Err(Error::config(format!(
                "material {name}: Young's modulus must be positive, got {youngs_modulus_mpa}"
            )));
        }
        if !(0.0..=1.0).contains(&infill_fraction) {
            return Err(Error::config(format!(
                "material {name}: infill fraction must be in [0, 1], got {infill_fraction}"
            )));
        }
        Ok(Self {
            name,
            youngs_modulus_mpa,
            infill_fraction,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn youngs_modulus_mpa(&self) -> f64 {
        self.youngs_modulus_mpa
    }

    pub fn infill_fraction(&self) -> f64 {
        self.infill_fraction
    }

    /// `clamp((log10 E + 0.5) / 4.5, 0, 1)`: 0 for gels, 1 for E ≥ 10 GPa.
    pub fn stiffness_index(&self) -> f64 {
        ((self.youngs_modulus_mpa.log10() + 0.5) / 4.5).clamp(0.0, 1.0)
    }

    /// Stiffness index scaled by infill; a hollow part behaves like the softest material.
    pub fn rigidity(&self) -> f64 {
        self.stiffness_index() * self.infill_fraction
    }
}

pub(crate) fn validate_label(name: &str) -> Result<()> {
    if name.is_empty() {
        return Err(Error::config("label must not be empty"));
    }
    if let Some(c) = name
        .chars()
        .find(|c| c.is_whitespace() || c.is_control() || matches!(c, ',' | '=' | '#'))
    {
        return Err(Error::config(format!(
            "label {name:?} contains forbidden character {c:?}"
        )));
    }
    Ok(())
}

/// Young's moduli (MPa) of the six solid test materials.
pub const SOLID_MATERIALS: [(&str, f64); 6] = [
    ("Silicone12", 0.4),
    ("Silicone18", 0.664),
    ("Silicone40", 1.696),
    ("FLEX", 63.7),
    ("TPU", 67.0),
    ("PLA", 3200.0),
];

/// The six solid materials, all at full infill.
pub fn solid_materials() -> Vec<MaterialSpec> {
    SOLID_MATERIALS
        .iter()
        .map(|&(name, e)| MaterialSpec::new(name, e, 1.0).expect("builtin material is valid"))
        .collect()
}

/// PLA at each infill fraction, named `PLA_infill<percent>`.
pub fn pla_infill_materials() -> Vec<MaterialSpec> {
    PLA_INFILLS
        .iter()
        .map(|&phi| {
            let name = format!("PLA_infill{}", (phi * 100.0).round() as u32);
            MaterialSpec::new(name, 3200.0, phi).expect("builtin material is valid")
        })
        .collect()
}

/// Full registry: the six solid materials followed by the PLA infill variants.
pub fn builtin_materials() -> Vec<MaterialSpec> {
    let mut all = solid_materials();
    all.extend(pla_infill_materials());
    all
}

pub fn find_material(name: &str) -> Option<MaterialSpec> {
    builtin_materials().into_iter().find(|m| m.name == name)
}

// Gain curve shape. `u` below is the stiffness coordinate in [0, 1].
const TRANSITION_CENTER: f64 = 0.5;
const TRANSITION_WIDTH: f64 = 0.02;
const TRANSITION_WEIGHT: f64 = 0.4;
const BASE_GAIN_SOFT: f64 = 0.65;
const BASE_GAIN_SPAN: f64 = 0.45;
const NOTCH_DEPTH_SOFT: f64 = 0.65;
const NOTCH_DEPTH_SPAN: f64 = -0.30;
const NOTCH_CENTER_SOFT_HZ: f64 = 120.0;
const NOTCH_CENTER_SPAN_HZ: f64 = 260.0;
const NOTCH_SIGMA_HZ: f64 = 18.0;
const TILT_SOFT: f64 = -1.4;
const TILT_SPAN: f64 = 1.7;
const TILT_ONSET_HZ: f64 = 400.0;
const TILT_SCALE_HZ: f64 = 400.0;
const TILT_MAX: f64 = 1.5;

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Map rigidity onto the curve coordinate that places the notch and sets the
/// tilt. A square-root term spreads the soft end, a smooth rubbery-to-glassy
/// step centred mid-scale separates the thermoplastics. Monotone, [0, 1].
fn stiffness_coordinate(rigidity: f64) -> f64 {
    let step = |r: f64| logistic((r - TRANSITION_CENTER) / TRANSITION_WIDTH);
    let (lo, hi) = (step(0.0), step(1.0));
    let normalized_step = (step(rigidity) - lo) / (hi - lo);
    (1.0 - TRANSITION_WEIGHT) * rigidity.sqrt() + TRANSITION_WEIGHT * normalized_step
}

/// Centre frequency of the low-band absorption notch.
pub fn notch_center_hz(m: &MaterialSpec) -> f64 {
    NOTCH_CENTER_SOFT_HZ + NOTCH_CENTER_SPAN_HZ * stiffness_coordinate(m.rigidity())
}

/// Magnitude of the object's transfer function at `freq_hz`.
///
/// Product of a broadband level (linear in rigidity), an exponential tilt
/// above 400 Hz (negative for soft objects, positive for rigid ones), and a
/// Gaussian notch in the low band. Continuous in frequency and strictly
/// positive.
pub fn transfer_magnitude(m: &MaterialSpec, freq_hz: f64) -> f64 {
    let r = m.rigidity();
    let u = stiffness_coordinate(r);
    let base = BASE_GAIN_SOFT + BASE_GAIN_SPAN * r;
    let tilt = TILT_SOFT + TILT_SPAN * u;
    let x = ((freq_hz - TILT_ONSET_HZ) / TILT_SCALE_HZ).clamp(0.0, TILT_MAX);
    let depth = NOTCH_DEPTH_SOFT + NOTCH_DEPTH_SPAN * u;
    let center = NOTCH_CENTER_SOFT_HZ + NOTCH_CENTER_SPAN_HZ * u;
    let z = (freq_hz - center) / NOTCH_SIGMA_HZ;
    let notch = 1.0 - depth * (-0.5 * z * z).exp();
    base * (tilt * x).exp() * notch
}

/// Additive sensor noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    Noiseless,
    /// Signal-to-noise ratio in dB relative to the clean signal's RMS.
    SnrDb(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub chirp: ChirpConfig,
    pub grip_force_n: f64,
    pub noise: NoiseLevel,
    pub seed: u64,
    pub num_trials: usize,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self {
            chirp: ChirpConfig::default(),
            grip_force_n: DEFAULT_GRIP_FORCE_N,
            noise: NoiseLevel::SnrDb(DEFAULT_SNR_DB),
            seed: 0,
            num_trials: DEFAULT_TRIALS,
        }
    }
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        self.chirp.validate()?;
        if self.num_trials < 1 {
            return Err(Error::config("number of trials must be at least 1"));
        }
        if !(self.grip_force_n.is_finite() && self.grip_force_n > 0.0) {
            return Err(Error::config(format!(
                "grip force must be positive, got {}",
                self.grip_force_n
            )));
        }
        if let NoiseLevel::SnrDb(db) = self.noise {
            if !db.is_finite() {
                return Err(Error::config(format!("SNR must be finite, got {db}")));
            }
        }
        Ok(())
    }
}

/// One emitter/receiver recording of a material.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub material: MaterialSpec,
    pub emitted: Waveform,
    pub received: Waveform,
    pub trial_index: u64,
    pub grip_force_n: f64,
    pub seed: u64,
}

impl Trial {
    pub fn new(
        material: MaterialSpec,
        emitted: Waveform,
        received: Waveform,
        trial_index: u64,
        grip_force_n: f64,
        seed: u64,
    ) -> Result<Self> {
        if emitted.len() != received.len() || emitted.sample_rate_hz() != received.sample_rate_hz()
        {
            return Err(Error::input(format!(
                "emitted ({} @ {} Hz) and received ({} @ {} Hz) waveforms differ in shape",
                emitted.len(),
                emitted.sample_rate_hz(),
                received.len(),
                received.sample_rate_hz()
            )));
        }
        Ok(Self {
            material,
            emitted,
            received,
            trial_index,
            grip_force_n,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum SensorRole {
    Emitter,
    Receiver,
}

fn noise_rng(seed: u64, material: &str, trial_index: u64, role: SensorRole) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(b"wavetouch/noise/v1");
    h.update(seed.to_le_bytes());
    h.update((material.len() as u64).to_le_bytes());
    h.update(material.as_bytes());
    h.update(trial_index.to_le_bytes());
    h.update([match role {
        SensorRole::Emitter => 0u8,
        SensorRole::Receiver => 1u8,
    }]);
    let mut key = [0u8; 32];
    key.copy_from_slice(&h.finalize());
    ChaCha8Rng::from_seed(key)
}

fn add_noise(clean: &[f64], noise: NoiseLevel, mut rng: ChaCha8Rng) -> Vec<f64> {
    let NoiseLevel::SnrDb(db) = noise else {
        return clean.to_vec();
    };
    let rms = (clean.iter().map(|v| v * v).sum::<f64>() / clean.len() as f64).sqrt();
    let sigma = rms * 10f64.powf(-db / 20.0);
    if sigma == 0.0 {
        return clean.to_vec();
    }
    let dist = Normal::new(0.0, sigma).expect("finite positive sigma");
    clean.iter().map(|v| v + dist.sample(&mut rng)).collect()
}

/// Pass `clean` through a zero-phase channel with magnitude `gain(f)`.
fn apply_gain(clean: &Waveform, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = clean.len();
    let bin_width = clean.sample_rate_hz() / n as f64;
    let spectrum: Vec<Complex64> = dft(clean)
        .into_iter()
        .enumerate()
        .map(|(k, c)| c * gain(k.min(n - k) as f64 * bin_width))
        .collect();
    inverse_dft_real(spectrum)
}

/// Simulate one trial through an arbitrary channel gain.
///
/// [`simulate_trial`] uses [`transfer_magnitude`]; other gains are useful for
/// calibration and for identity-channel checks.
pub fn simulate_trial_through(
    m: &MaterialSpec,
    cfg: &TrialConfig,
    trial_index: u64,
    gain: impl Fn(f64) -> f64,
) -> Result<Trial> {
    cfg.validate()?;
    let clean = generate_chirp(&cfg.chirp)?;
    let through = apply_gain(&clean, gain);
    let fs = clean.sample_rate_hz();
    let emitted = add_noise(
        clean.samples(),
        cfg.noise,
        noise_rng(cfg.seed, m.name(), trial_index, SensorRole::Emitter),
    );
    let received = add_noise(
        &through,
        cfg.noise,
        noise_rng(cfg.seed, m.name(), trial_index, SensorRole::Receiver),
    );
    Trial::new(
        m.clone(),
        Waveform::new(emitted, fs)?,
        Waveform::new(received, fs)?,
        trial_index,
        cfg.grip_force_n,
        cfg.seed,
    )
}

pub fn simulate_trial(m: &MaterialSpec, cfg: &TrialConfig, trial_index: u64) -> Result<Trial> {
    simulate_trial_through(m, cfg, trial_index, |f| transfer_magnitude(m, f))
}

/// `cfg.num_trials` trials per material, ordered by material then trial index.
pub fn synth_dataset(materials: &[MaterialSpec], cfg: &TrialConfig) -> Result<Vec<Trial>> {
    if materials.is_empty() {
        return Err(Error::input("no materials given"));
    }
    for (i, m) in materials.iter().enumerate() {
        if materials[..i].iter().any(|o| o.name == m.name) {
            return Err(Error::input(format!("duplicate material name {}", m.name)));
        }
    }
    cfg.validate()?;
    let jobs: Vec<(&MaterialSpec, u64)> = materials
        .iter()
        .flat_map(|m| (0..cfg.num_trials as u64).map(move |i| (m, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(m, i)| simulate_trial(m, cfg, i))
        .collect()
}
