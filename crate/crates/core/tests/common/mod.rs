//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use wavetouch::features::{extract_features, BandConfig, FeatureVector};
use wavetouch::material_sim::{synth_dataset, MaterialSpec, Trial, TrialConfig};
use wavetouch::signals::{dft_magnitude, Waveform};

/// Textbook O(N²) DFT with an exact-index twiddle table.
pub fn naive_dft(x: &[f64]) -> Vec<(f64, f64)> {
    let n = x.len();
    let twiddle: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let a = -2.0 * PI * j as f64 / n as f64;
            (a.cos(), a.sin())
        })
        .collect();
    (0..n)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (i, &v) in x.iter().enumerate() {
                let (c, s) = twiddle[(k * i) % n];
                re += v * c;
                im += v * s;
            }
            (re, im)
        })
        .collect()
}

pub fn naive_magnitudes(x: &[f64]) -> Vec<f64> {
    naive_dft(x)[..=x.len() / 2]
        .iter()
        .map(|(re, im)| re.hypot(*im))
        .collect()
}

/// Brute-force centered average with shrinking edge windows.
pub fn brute_boxcar(values: &[f64], window: usize) -> Vec<f64> {
    let half = (window / 2) as isize;
    let n = values.len() as isize;
    (0..n)
        .map(|k| {
            let mut sum = 0.0;
            let mut count = 0.0;
            for j in (k - half)..=(k + half) {
                if j >= 0 && j < n {
                    sum += values[j as usize];
                    count += 1.0;
                }
            }
            sum / count
        })
        .collect()
}

/// Slope from the 2x2 normal equations solved by Cramer's rule.
pub fn normal_equations_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let n = ra.len() as f64;
    let (ma, mb) = (ra.iter().sum::<f64>() / n, rb.iter().sum::<f64>() / n);
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

/// Sum of DFT magnitudes over bins whose centre lies in `[lo, hi]`.
pub fn band_sum(w: &Waveform, lo: f64, hi: f64) -> f64 {
    let s = dft_magnitude(w).unwrap();
    s.magnitudes()
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let f = s.frequency_of(*k);
            f >= lo && f <= hi
        })
        .map(|(_, m)| m)
        .sum()
}

/// Received/emitted band magnitude ratio for one trial.
pub fn band_ratio(t: &Trial, lo: f64, hi: f64) -> f64 {
    band_sum(&t.received, lo, hi) / band_sum(&t.emitted, lo, hi)
}

pub fn labelled_features(
    materials: &[MaterialSpec],
    cfg: &TrialConfig,
    bands: &BandConfig,
) -> Vec<(String, FeatureVector)> {
    synth_dataset(materials, cfg)
        .unwrap()
        .iter()
        .map(|t| {
            (
                t.material.name().to_string(),
                extract_features(t, bands).unwrap(),
            )
        })
        .collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn std_dev(v: &[f64]) -> f64 {
    let m = mean(v);
    (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}
