//! Model persistence as plain `key=value` text.
//!
//! ```text
//! format_version=1
//! features=peak_freq,slope
//! band_low_hz=100:400
//! band_high_hz=400:800
//! filter_width_hz=50
//! norm.0.mean=...
//! norm.0.std=...
//! norm.1.mean=...
//! norm.1.std=...
//! classes=2
//! class.0.label=FLEX
//! class.0.centroid=...,...
//! class.1.label=PLA
//! class.1.centroid=...,...
//! ```
//!
//! Blank lines and `#` comments are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{fmt_f64, read_text, write_atomic};
use crate::classify::{Centroid, Model, Normalization};
use crate::error::{Error, Result};
use crate::features::{Band, BandConfig, Feature};

pub const MODEL_FORMAT_VERSION: u32 = 1;

pub fn render_model(m: &Model) -> String {
    let mut out = String::new();
    let b = &m.band_config;
    let _ = writeln!(out, "format_version={MODEL_FORMAT_VERSION}");
    let _ = writeln!(out, "features={},{}", m.features[0], m.features[1]);
    let _ = writeln!(
        out,
        "band_low_hz={}:{}",
        fmt_f64(b.low.lo_hz),
        fmt_f64(b.low.hi_hz)
    );
    let _ = writeln!(
        out,
        "band_high_hz={}:{}",
        fmt_f64(b.high.lo_hz),
        fmt_f64(b.high.hi_hz)
    );
    let _ = writeln!(out, "filter_width_hz={}", fmt_f64(b.filter_width_hz));
    for (i, n) in m.normalization.iter().enumerate() {
        let _ = writeln!(out, "norm.{i}.mean={}", fmt_f64(n.mean));
        let _ = writeln!(out, "norm.{i}.std={}", fmt_f64(n.std));
    }
    let _ = writeln!(out, "classes={}", m.classes.len());
    for (i, c) in m.classes.iter().enumerate() {
        let _ = writeln!(out, "class.{i}.label={}", c.label);
        let _ = writeln!(
            out,
            "class.{i}.centroid={},{}",
            fmt_f64(c.position[0]),
            fmt_f64(c.position[1])
        );
    }
    out
}

pub fn save_model(m: &Model, path: &Path) -> Result<()> {
    write_atomic(path, render_model(m).as_bytes())
}

pub fn load_model(path: &Path) -> Result<Model> {
    parse_model(&read_text(path)?, path)
}

struct Entries<'a> {
    origin: &'a Path,
    map: BTreeMap<&'a str, (&'a str, usize)>,
    last_line: usize,
}

impl<'a> Entries<'a> {
    fn fail(&self, line: usize, message: String) -> Error {
        Error::Parse {
            path: self.origin.to_path_buf(),
            line,
            message,
        }
    }

    fn raw(&self, key: &str) -> Result<(&'a str, usize)> {
        self.map
            .get(key)
            .copied()
            .ok_or_else(|| self.fail(self.last_line, format!("missing key {key:?}")))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T> {
        let (value, line) = self.raw(key)?;
        value
            .parse()
            .map_err(|_| self.fail(line, format!("invalid value {value:?} for {key}")))
    }

    fn pair<T: std::str::FromStr>(&self, key: &str, sep: char) -> Result<(T, T)> {
        let (value, line) = self.raw(key)?;
        let bad = || self.fail(line, format!("invalid pair {value:?} for {key}"));
        let (a, b) = value.split_once(sep).ok_or_else(bad)?;
        Ok((
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
        ))
    }

    fn band(&self, key: &str) -> Result<Band> {
        let (lo, hi) = self.pair(key, ':')?;
        Ok(Band::new(lo, hi))
    }
}

pub fn parse_model(text: &str, origin: &Path) -> Result<Model> {
    let mut entries = Entries {
        origin,
        map: BTreeMap::new(),
        last_line: text.lines().count(),
    };
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| entries.fail(no, format!("line {line:?} is not key=value")))?;
        if entries.map.insert(key.trim(), (value.trim(), no)).is_some() {
            return Err(entries.fail(no, format!("duplicate key {:?}", key.trim())));
        }
    }

    let version: u32 = entries.parse("format_version")?;
    if version != MODEL_FORMAT_VERSION {
        let line = entries.raw("format_version")?.1;
        return Err(entries.fail(line, format!("unsupported format_version {version}")));
    }

    let (features_raw, features_line) = entries.raw("features")?;
    let parsed: Vec<Feature> = features_raw
        .split(',')
        .map(str::parse)
        .collect::<Result<_>>()
        .map_err(|e| entries.fail(features_line, e.to_string()))?;
    let features: [Feature; 2] = parsed
        .try_into()
        .map_err(|_| entries.fail(features_line, "expected exactly two features".into()))?;

    let band_config = BandConfig {
        low: entries.band("band_low_hz")?,
        high: entries.band("band_high_hz")?,
        filter_width_hz: entries.parse("filter_width_hz")?,
    };
    band_config.validate().map_err(|e| {
        entries.fail(
            entries.raw("band_low_hz").map(|r| r.1).unwrap_or(0),
            e.to_string(),
        )
    })?;

    let mut normalization = [Normalization {
        mean: 0.0,
        std: 1.0,
    }; 2];
    for (i, n) in normalization.iter_mut().enumerate() {
        n.mean = entries.parse(&format!("norm.{i}.mean"))?;
        n.std = entries.parse(&format!("norm.{i}.std"))?;
    }

    let count: usize = entries.parse("classes")?;
    let classes = (0..count)
        .map(|i| {
            let (label, line) = entries.raw(&format!("class.{i}.label"))?;
            crate::material_sim::validate_label(label)
                .map_err(|e| entries.fail(line, e.to_string()))?;
            let (x, y) = entries.pair(&format!("class.{i}.centroid"), ',')?;
            Ok(Centroid {
                label: label.to_string(),
                position: [x, y],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let expected_keys = 10 + 2 * count;
    if entries.map.len() != expected_keys {
        let known = |k: &str| {
            matches!(
                k,
                "format_version"
                    | "features"
                    | "band_low_hz"
                    | "band_high_hz"
                    | "filter_width_hz"
                    | "classes"
            ) || (0..2).any(|i| k == format!("norm.{i}.mean") || k == format!("norm.{i}.std"))
                || (0..count)
                    .any(|i| k == format!("class.{i}.label") || k == format!("class.{i}.centroid"))
        };
        if let Some((key, (_, line))) = entries.map.iter().find(|(k, _)| !known(k)) {
            return Err(entries.fail(*line, format!("unexpected key {key:?}")));
        }
    }

    let model = Model {
        classes,
        normalization,
        features,
        band_config,
    };
    model
        .validate()
        .map_err(|e| entries.fail(entries.last_line, e.to_string()))?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(text: &str) -> Result<Model> {
        parse_model(text, Path::new("model.txt"))
    }

    fn model(centroids: Vec<(String, [f64; 2])>, norm: [(f64, f64); 2]) -> Model {
        Model {
            classes: centroids
                .into_iter()
                .map(|(label, position)| Centroid { label, position })
                .collect(),
            normalization: norm.map(|(mean, std)| Normalization { mean, std }),
            features: [Feature::PeakFreq, Feature::Slope],
            band_config: BandConfig::default(),
        }
    }

    fn two_class() -> Model {
        model(
            vec![("A".into(), [-1.0, -1.0]), ("B".into(), [1.0, 1.0])],
            [(200.0, 100.0), (0.0, 1.0)],
        )
    }

    #[test]
    fn rejects_bad_files() {
        let good = render_model(&two_class());
        assert_eq!(parse(&good).unwrap(), two_class());

        let v2 = good.replace("format_version=1", "format_version=2");
        assert!(matches!(parse(&v2), Err(Error::Parse { line: 1, .. })));

        let no_std = good.replace("norm.1.std=1.0000000000000000e0\n", "");
        assert!(parse(&no_std).is_err());

        let zero_std = good.replace("norm.1.std=1.0000000000000000e0", "norm.1.std=0");
        assert!(parse(&zero_std).is_err());

        let unsorted = good.replace("label=A", "label=C");
        assert!(parse(&unsorted).is_err());

        let extra = format!("{good}bogus=1\n");
        assert!(matches!(parse(&extra), Err(Error::Parse { line: 15, .. })));

        let feature = good.replace("features=peak_freq,slope", "features=peak_freq");
        assert!(matches!(parse(&feature), Err(Error::Parse { line: 2, .. })));

        let commented = format!("# trained offline\n\n{good}");
        assert_eq!(parse(&commented).unwrap(), two_class());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn round_trip_is_exact(
            positions in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 2..10),
            means in (-1e9f64..1e9, -1e9f64..1e9),
            stds in (1e-12f64..1e9, 1e-12f64..1e9),
        ) {
            let centroids = positions
                .into_iter()
                .enumerate()
                .map(|(i, (x, y))| (format!("class{i:02}"), [x, y]))
                .collect();
            let m = model(centroids, [(means.0, stds.0), (means.1, stds.1)]);
            prop_assert_eq!(parse(&render_model(&m)).unwrap(), m);
        }
    }
}
