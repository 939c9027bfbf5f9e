mod common;

use common::{brute_boxcar, naive_dft, naive_magnitudes};
use proptest::prelude::*;
use wavetouch::signals::{
    dft, dft_magnitude, generate_chirp, uniform_filter, window_bins, ChirpConfig, Spectrum,
    Waveform,
};

fn waveform(len: std::ops::Range<usize>) -> impl Strategy<Value = Waveform> {
    prop::collection::vec(-10.0f64..10.0, len).prop_map(|v| Waveform::new(v, 1000.0).unwrap())
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn magnitude_matches_naive_dft(w in waveform(1..1025)) {
        let fast = dft_magnitude(&w).unwrap();
        let slow = naive_magnitudes(w.samples());
        prop_assert_eq!(fast.len(), slow.len());
        let scale = max_abs(&slow).max(f64::MIN_POSITIVE);
        for (a, b) in fast.magnitudes().iter().zip(&slow) {
            prop_assert!((a - b).abs() <= 1e-9 * scale, "{} vs {}", a, b);
        }
        prop_assert_eq!(fast.bin_width_hz(), 1000.0 / w.len() as f64);
    }

    #[test]
    fn parseval(w in waveform(1..1025)) {
        let energy: f64 = w.samples().iter().map(|x| x * x).sum();
        let spectral: f64 = dft(&w).iter().map(|c| c.norm_sqr()).sum::<f64>() / w.len() as f64;
        prop_assert!((energy - spectral).abs() <= 1e-9 * energy.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn full_transform_matches_naive(w in waveform(1..300)) {
        let fast = dft(&w);
        let slow = naive_dft(w.samples());
        let scale = slow.iter().fold(0.0f64, |m, (re, im)| m.max(re.hypot(*im))).max(1e-300);
        for (a, (re, im)) in fast.iter().zip(&slow) {
            prop_assert!((a.re - re).abs() <= 1e-9 * scale && (a.im - im).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn magnitude_is_homogeneous(w in waveform(1..1025), a in -100.0f64..100.0) {
        let scaled = Waveform::new(w.samples().iter().map(|x| a * x).collect(), w.sample_rate_hz()).unwrap();
        let base = dft_magnitude(&w).unwrap();
        let out = dft_magnitude(&scaled).unwrap();
        let scale = a.abs() * max_abs(base.magnitudes());
        for (x, y) in base.magnitudes().iter().zip(out.magnitudes()) {
            prop_assert!((a.abs() * x - y).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn filter_matches_brute_force(
        values in prop::collection::vec(0.0f64..100.0, 1..400),
        width in 0.1f64..80.0,
        bin_width in 0.25f64..4.0,
    ) {
        let s = Spectrum::new(values.clone(), bin_width).unwrap();
        let out = uniform_filter(&s, width).unwrap();
        let expected = brute_boxcar(&values, window_bins(width, bin_width));
        prop_assert_eq!(out.len(), values.len());
        prop_assert_eq!(out.bin_width_hz(), bin_width);
        for (a, b) in out.magnitudes().iter().zip(&expected) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn chirp_length_and_bound(
        f0 in 1.0f64..500.0,
        span in 0.0f64..500.0,
        duration in 0.01f64..3.0,
        amplitude in 0.01f64..10.0,
    ) {
        let cfg = ChirpConfig {
            f_start_hz: f0,
            f_end_hz: f0 + span,
            duration_s: duration,
            amplitude,
            sample_rate_hz: 4096.0,
        };
        let w = generate_chirp(&cfg).unwrap();
        prop_assert_eq!(w.len(), (duration * 4096.0).round() as usize);
        prop_assert!(w.samples().iter().all(|v| v.abs() <= amplitude));
    }
}

#[test]
fn sine_spectrum_matches_naive_oracle() {
    let cfg = ChirpConfig {
        f_start_hz: 200.0,
        f_end_hz: 200.0,
        duration_s: 1.0,
        ..ChirpConfig::default()
    };
    let w = generate_chirp(&cfg).unwrap();
    let fast = dft_magnitude(&w).unwrap();
    let slow = naive_magnitudes(w.samples());
    let scale = max_abs(&slow);
    for (a, b) in fast.magnitudes().iter().zip(&slow) {
        assert!((a - b).abs() <= 1e-9 * scale);
    }
    let argmax = slow
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert_eq!(fast.frequency_of(argmax), 200.0);
}

#[test]
fn impulse_filter_matches_oracle() {
    let mut v = vec![0.0; 40];
    v[10] = 1.0;
    let expected = brute_boxcar(&v, 5);
    for k in 0..40 {
        let want = if (8..=12).contains(&k) { 0.2 } else { 0.0 };
        assert_eq!(expected[k], want);
    }
}
