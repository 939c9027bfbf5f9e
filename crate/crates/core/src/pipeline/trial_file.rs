//! Trial recordings as comma-separated text.
//!
//! ```text
//! # format_version=1
//! # sample_rate_hz=4096
//! # material=Silicone12
//! # youngs_modulus_mpa=0.4
//! # infill_fraction=1
//! # trial_index=0
//! # grip_force_n=1
//! # seed=42
//! time_s,accel_emit,accel_recv
//! 0.0000000000000000e0,0.0000000000000000e0,1.2207031250000000e-4
//! ...
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{fmt_f64, read_text, write_atomic};
use crate::error::{Error, Result};
use crate::material_sim::{MaterialSpec, Trial};
use crate::signals::Waveform;

pub const TRIAL_FORMAT_VERSION: u32 = 1;
const COLUMNS: &str = "time_s,accel_emit,accel_recv";
const HEADER_KEYS: [&str; 8] = [
    "format_version",
    "sample_rate_hz",
    "material",
    "youngs_modulus_mpa",
    "infill_fraction",
    "trial_index",
    "grip_force_n",
    "seed",
];
const STEP_TOLERANCE: f64 = 1e-9;

pub fn render_trial(t: &Trial) -> String {
    let fs = t.emitted.sample_rate_hz();
    let m = &t.material;
    let mut out = String::with_capacity(t.emitted.len() * 72 + 256);
    let _ = writeln!(out, "# format_version={TRIAL_FORMAT_VERSION}");
    let _ = writeln!(out, "# sample_rate_hz={fs}");
    let _ = writeln!(out, "# material={}", m.name());
    let _ = writeln!(out, "# youngs_modulus_mpa={}", m.youngs_modulus_mpa());
    let _ = writeln!(out, "# infill_fraction={}", m.infill_fraction());
    let _ = writeln!(out, "# trial_index={}", t.trial_index);
    let _ = writeln!(out, "# grip_force_n={}", t.grip_force_n);
    let _ = writeln!(out, "# seed={}", t.seed);
    out.push_str(COLUMNS);
    out.push('\n');
    for (i, (e, r)) in t
        .emitted
        .samples()
        .iter()
        .zip(t.received.samples())
        .enumerate()
    {
        let time = i as f64 / fs;
        let _ = writeln!(out, "{},{},{}", fmt_f64(time), fmt_f64(*e), fmt_f64(*r));
    }
    out
}

pub fn write_trial(t: &Trial, path: &Path) -> Result<()> {
    write_atomic(path, render_trial(t).as_bytes())
}

pub fn ingest_trial(path: &Path) -> Result<Trial> {
    parse_trial(&read_text(path)?, path)
}

/// Parse trial text; `origin` is only used in error messages.
pub fn parse_trial(text: &str, origin: &Path) -> Result<Trial> {
    let fail = |line: usize, message: String| Error::Parse {
        path: origin.to_path_buf(),
        line,
        message,
    };

    let mut header: BTreeMap<&str, (&str, usize)> = BTreeMap::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
    while let Some(&(no, line)) = lines.peek() {
        let Some(body) = line.strip_prefix('#') else {
            break;
        };
        lines.next();
        let body = body.trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| fail(no, format!("header line {body:?} is not key=value")))?;
        let (key, value) = (key.trim(), value.trim());
        if !HEADER_KEYS.contains(&key) {
            return Err(fail(no, format!("unknown header key {key:?}")));
        }
        if header.insert(key, (value, no)).is_some() {
            return Err(fail(no, format!("duplicate header key {key:?}")));
        }
    }

    let (columns_no, columns) = lines
        .next()
        .ok_or_else(|| fail(text.lines().count() + 1, "missing column header".into()))?;
    for key in HEADER_KEYS {
        if !header.contains_key(key) {
            return Err(fail(columns_no, format!("missing header key {key:?}")));
        }
    }
    if columns.trim() != COLUMNS {
        return Err(fail(
            columns_no,
            format!(
                "expected column header {COLUMNS:?}, got {:?}",
                columns.trim()
            ),
        ));
    }

    fn field<T: std::str::FromStr>(
        header: &BTreeMap<&str, (&str, usize)>,
        key: &str,
        fail: &impl Fn(usize, String) -> Error,
    ) -> Result<T> {
        let (value, no) = header[key];
        value
            .parse()
            .map_err(|_| fail(no, format!("invalid value {value:?} for {key}")))
    }

    let version: u32 = field(&header, "format_version", &fail)?;
    if version != TRIAL_FORMAT_VERSION {
        return Err(fail(
            header["format_version"].1,
            format!("unsupported format_version {version}"),
        ));
    }
    let fs: f64 = field(&header, "sample_rate_hz", &fail)?;
    if !(fs.is_finite() && fs > 0.0) {
        return Err(fail(
            header["sample_rate_hz"].1,
            format!("sample rate must be positive, got {fs}"),
        ));
    }
    let material = MaterialSpec::new(
        header["material"].0,
        field(&header, "youngs_modulus_mpa", &fail)?,
        field(&header, "infill_fraction", &fail)?,
    )
    .map_err(|e| fail(header["material"].1, e.to_string()))?;
    let trial_index: u64 = field(&header, "trial_index", &fail)?;
    let grip_force_n: f64 = field(&header, "grip_force_n", &fail)?;
    let seed: u64 = field(&header, "seed", &fail)?;

    let step = 1.0 / fs;
    let mut emitted = Vec::new();
    let mut received = Vec::new();
    let mut prev_time: Option<f64> = None;
    for (no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = |name: &str| -> Result<f64> {
            let raw = parts
                .next()
                .ok_or_else(|| fail(no, format!("missing {name} column")))?;
            let v: f64 = raw
                .trim()
                .parse()
                .map_err(|_| fail(no, format!("invalid {name} value {raw:?}")))?;
            if !v.is_finite() {
                return Err(fail(no, format!("{name} value {raw:?} is not finite")));
            }
            Ok(v)
        };
        let time = next("time_s")?;
        let e = next("accel_emit")?;
        let r = next("accel_recv")?;
        if parts.next().is_some() {
            return Err(fail(no, "too many columns".into()));
        }
        if let Some(prev) = prev_time {
            let dt = time - prev;
            if (dt - step).abs() > STEP_TOLERANCE * step {
                return Err(fail(
                    no,
                    format!("non-uniform timestamp step {dt} s, expected {step} s"),
                ));
            }
        }
        prev_time = Some(time);
        emitted.push(e);
        received.push(r);
    }
    if emitted.is_empty() {
        return Err(fail(columns_no, "no sample rows".into()));
    }

    Trial::new(
        material,
        Waveform::new(emitted, fs)?,
        Waveform::new(received, fs)?,
        trial_index,
        grip_force_n,
        seed,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_trial(emit: Vec<f64>, recv: Vec<f64>, fs: f64) -> Trial {
        Trial::new(
            MaterialSpec::new("Gel", 0.25, 0.5).unwrap(),
            Waveform::new(emit, fs).unwrap(),
            Waveform::new(recv, fs).unwrap(),
            3,
            1.0,
            99,
        )
        .unwrap()
    }

    fn parse(text: &str) -> Result<Trial> {
        parse_trial(text, Path::new("mem.csv"))
    }

    fn line_of(err: Error) -> usize {
        match err {
            Error::Parse { line, .. } => line,
            other => panic!("expected parse error, got {other}"),
        }
    }

    #[test]
    fn renders_expected_header() {
        let text = render_trial(&small_trial(vec![0.5, -0.25], vec![0.0, 1.0], 4.0));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# format_version=1");
        assert_eq!(lines[1], "# sample_rate_hz=4");
        assert_eq!(lines[2], "# material=Gel");
        assert_eq!(lines[8], COLUMNS);
        assert_eq!(
            lines[9],
            "0.0000000000000000e0,5.0000000000000000e-1,0.0000000000000000e0"
        );
        assert_eq!(
            lines[10],
            "2.5000000000000000e-1,-2.5000000000000000e-1,1.0000000000000000e0"
        );
    }

    #[test]
    fn reports_line_numbers() {
        let good = render_trial(&small_trial(
            vec![0.5, -0.25, 0.1],
            vec![0.0, 1.0, 0.2],
            4.0,
        ));

        let bad_row = good.replace("-2.5000000000000000e-1,", "abc,");
        assert_eq!(line_of(parse(&bad_row).unwrap_err()), 11);

        let skewed = good.replace("2.5000000000000000e-1,-", "2.6000000000000000e-1,-");
        assert_eq!(line_of(parse(&skewed).unwrap_err()), 11);

        let no_seed = good.replace("# seed=99\n", "");
        assert_eq!(line_of(parse(&no_seed).unwrap_err()), 8);

        let bad_header = good.replace("# trial_index=3", "# trial_index=three");
        assert_eq!(line_of(parse(&bad_header).unwrap_err()), 6);

        let garbage = good.replace("# grip_force_n=1", "# grip_force_n");
        assert_eq!(line_of(parse(&garbage).unwrap_err()), 7);

        let extra = good.replacen("e0\n", "e0,1\n", 1);
        assert!(parse(&extra).is_err());

        let header_only: String = good.lines().take(9).map(|l| format!("{l}\n")).collect();
        assert_eq!(line_of(parse(&header_only).unwrap_err()), 9);

        let reversed = good.replace("# sample_rate_hz=4", "# sample_rate_hz=-4");
        assert!(parse(&reversed).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            ingest_trial(Path::new("/nonexistent/trial.csv")),
            Err(Error::Io { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn round_trip_is_lossless(
            samples in prop::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 1..200),
            fs in prop::sample::select(vec![100.0, 1000.0, 4096.0, 44100.0, 48000.0]),
        ) {
            let (emit, recv): (Vec<f64>, Vec<f64>) = samples.into_iter().unzip();
            let t = small_trial(emit, recv, fs);
            let back = parse(&render_trial(&t)).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
