//! Nearest-centroid classification in a z-scored two-feature space.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::features::{BandConfig, Feature, FeatureVector};

/// Default classification axes: low-band peak frequency and high-band slope.
pub const DEFAULT_FEATURES: [Feature; 2] = [Feature::PeakFreq, Feature::Slope];

/// Per-feature z-score statistics (population standard deviation).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub mean: f64,
    pub std: f64,
}

impl Normalization {
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.mean) / self.std
    }

    pub fn invert(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Centroid {
    pub label: String,
    pub position: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    /// Sorted by label.
    pub classes: Vec<Centroid>,
    pub normalization: [Normalization; 2],
    pub features: [Feature; 2],
    pub band_config: BandConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: String,
    /// Distance to each class, in the model's class order.
    pub distances: Vec<f64>,
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 {
            return Err(Error::input("model needs at least two classes"));
        }
        if !self.classes.windows(2).all(|p| p[0].label < p[1].label) {
            return Err(Error::input("model class labels must be unique and sorted"));
        }
        for (feature, n) in self.features.iter().zip(&self.normalization) {
            if !(n.std > 0.0 && n.std.is_finite() && n.mean.is_finite()) {
                return Err(Error::input(format!(
                    "feature {feature} has invalid normalization ({}, {})",
                    n.mean, n.std
                )));
            }
        }
        if self.features[0] == self.features[1] {
            return Err(Error::config("the two classification features must differ"));
        }
        Ok(())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(|c| c.label.as_str())
    }

    pub fn raw_pair(&self, fv: &FeatureVector) -> [f64; 2] {
        [fv.get(self.features[0]), fv.get(self.features[1])]
    }

    pub fn normalize(&self, raw: [f64; 2]) -> [f64; 2] {
        [
            self.normalization[0].apply(raw[0]),
            self.normalization[1].apply(raw[1]),
        ]
    }

    /// Nearest centroid by Euclidean distance; ties go to the
    /// lexicographically smallest label.
    pub fn predict(&self, fv: &FeatureVector) -> Result<Prediction> {
        if !fv.is_finite() {
            return Err(Error::input(format!(
                "feature vector has non-finite values: {fv:?}"
            )));
        }
        let z = self.normalize(self.raw_pair(fv));
        let distances: Vec<f64> = self
            .classes
            .iter()
            .map(|c| (z[0] - c.position[0]).hypot(z[1] - c.position[1]))
            .collect();
        let mut best = 0;
        for (i, d) in distances.iter().enumerate() {
            if *d < distances[best] {
                best = i;
            }
        }
        Ok(Prediction {
            label: self.classes[best].label.clone(),
            distances,
        })
    }
}

fn population_stats(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fit a nearest-centroid model on labelled feature vectors.
///
/// Fails when fewer than two labels are present, when the two selected
/// features coincide, or when a selected feature is constant over all samples.
pub fn fit(
    samples: &[(String, FeatureVector)],
    features: [Feature; 2],
    band_config: BandConfig,
) -> Result<Model> {
    if features[0] == features[1] {
        return Err(Error::config(format!(
            "the two classification features must differ, got {} twice",
            features[0]
        )));
    }
    if let Some((label, fv)) = samples.iter().find(|(_, fv)| !fv.is_finite()) {
        return Err(Error::input(format!(
            "sample {label} has non-finite features: {fv:?}"
        )));
    }
    let mut labels: Vec<&str> = samples.iter().map(|(l, _)| l.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::Fit(format!(
            "need at least two classes, got {}",
            labels.len()
        )));
    }

    let mut normalization = [Normalization {
        mean: 0.0,
        std: 1.0,
    }; 2];
    for (slot, &feature) in normalization.iter_mut().zip(&features) {
        let values: Vec<f64> = samples.iter().map(|(_, fv)| fv.get(feature)).collect();
        let (mean, std) = population_stats(&values);
        if values.iter().all(|&v| v == values[0]) || !(std > 0.0) {
            return Err(Error::Fit(format!(
                "feature {feature} has zero variance across all samples"
            )));
        }
        *slot = Normalization { mean, std };
    }

    let classes = labels
        .into_iter()
        .map(|label| {
            let mut sum = [0.0; 2];
            let mut count = 0usize;
            for (_, fv) in samples.iter().filter(|(l, _)| l == label) {
                for (i, &feature) in features.iter().enumerate() {
                    sum[i] += normalization[i].apply(fv.get(feature));
                }
                count += 1;
            }
            Centroid {
                label: label.to_string(),
                position: [sum[0] / count as f64, sum[1] / count as f64],
            }
        })
        .collect();

    Ok(Model {
        classes,
        normalization,
        features,
        band_config,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapPoint {
    pub label: String,
    pub raw: [f64; 2],
    pub normalized: [f64; 2],
}

/// Scatter data for a classification map.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationMap {
    pub features: [Feature; 2],
    pub points: Vec<MapPoint>,
    pub centroids: Vec<Centroid>,
}

/// Project samples into the model's normalized space, ordered by label then input order.
pub fn export_map(model: &Model, samples: &[(String, FeatureVector)]) -> ClassificationMap {
    let mut points: Vec<MapPoint> = samples
        .iter()
        .map(|(label, fv)| {
            let raw = model.raw_pair(fv);
            MapPoint {
                label: label.clone(),
                raw,
                normalized: model.normalize(raw),
            }
        })
        .collect();
    points.sort_by(|a, b| a.label.cmp(&b.label));
    ClassificationMap {
        features: model.features,
        points,
        centroids: model.classes.clone(),
    }
}

/// Stratified shuffle split: each label contributes `round(n * test_fraction)`
/// samples to the test set. Relative order within each output follows the input.
pub fn train_test_split<T: Clone>(
    samples: &[(String, T)],
    test_fraction: f64,
    seed: u64,
) -> (Vec<(String, T)>, Vec<(String, T)>) {
    let mut labels: Vec<&str> = samples.iter().map(|(l, _)| l.as_str()).collect();
    labels.sort_unstable();
    labels.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut is_test = vec![false; samples.len()];
    for label in labels {
        let mut idx: Vec<usize> = (0..samples.len())
            .filter(|&i| samples[i].0 == label)
            .collect();
        let n_test = (idx.len() as f64 * test_fraction).round() as usize;
        idx.shuffle(&mut rng);
        for &i in &idx[..n_test.min(idx.len())] {
            is_test[i] = true;
        }
    }
    let (test, train): (Vec<_>, Vec<_>) =
        samples.iter().cloned().zip(is_test).partition(|(_, t)| *t);
    (
        train.into_iter().map(|(s, _)| s).collect(),
        test.into_iter().map(|(s, _)| s).collect(),
    )
}

/// Fraction of samples whose predicted label matches.
pub fn accuracy(model: &Model, samples: &[(String, FeatureVector)]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::input("no samples to score"));
    }
    let mut correct = 0usize;
    for (label, fv) in samples {
        if model.predict(fv)?.label == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / samples.len() as f64)
}
