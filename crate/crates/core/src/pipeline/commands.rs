use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{fmt_f64, ingest_trial, load_model, render_svg, save_model, write_atomic, write_trial};
use crate::classify::{export_map, fit, ClassificationMap, Model};
use crate::error::{Error, Result};
use crate::features::{extract_features, trial_spectra, BandConfig, Feature, FeatureVector};
use crate::material_sim::{
    builtin_materials, find_material, pla_infill_materials, solid_materials, synth_dataset,
    MaterialSpec, Trial, TrialConfig,
};

/// Resolve a `--materials` argument.
///
/// Accepts `builtin` (the six solid materials), `infill` (PLA infill
/// variants), `all`, or a comma-separated list whose items are registry
/// names or custom `NAME:E_MPA[:INFILL]` specs.
pub fn parse_materials(arg: &str) -> Result<Vec<MaterialSpec>> {
    match arg.trim() {
        "builtin" => return Ok(solid_materials()),
        "infill" => return Ok(pla_infill_materials()),
        "all" => return Ok(builtin_materials()),
        _ => {}
    }
    let mut out: Vec<MaterialSpec> = Vec::new();
    for item in arg.split(',').map(str::trim) {
        let num = |v: &str| {
            v.parse::<f64>().map_err(|_| {
                Error::config(format!("material spec {item:?}: {v:?} is not a number"))
            })
        };
        let spec = match item.split(':').collect::<Vec<_>>()[..] {
            [name] => find_material(name).ok_or_else(|| {
                Error::config(format!(
                    "unknown material {name:?}; use NAME:E_MPA[:INFILL] for custom materials"
                ))
            })?,
            [name, e] => MaterialSpec::new(name, num(e)?, 1.0)?,
            [name, e, phi] => MaterialSpec::new(name, num(e)?, num(phi)?)?,
            _ => return Err(Error::config(format!("malformed material spec {item:?}"))),
        };
        if out.iter().any(|m| m.name() == spec.name()) {
            return Err(Error::config(format!(
                "material {} listed twice",
                spec.name()
            )));
        }
        out.push(spec);
    }
    Ok(out)
}

pub fn trial_file_name(t: &Trial) -> String {
    format!("{}_trial{:03}.csv", t.material.name(), t.trial_index)
}

/// Generate a dataset and write one trial file per trial into `out_dir`.
pub fn cmd_synth(
    materials: &[MaterialSpec],
    cfg: &TrialConfig,
    out_dir: &Path,
) -> Result<Vec<PathBuf>> {
    let trials = synth_dataset(materials, cfg)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    trials
        .par_iter()
        .map(|t| {
            let path = out_dir.join(trial_file_name(t));
            write_trial(t, &path)?;
            Ok(path)
        })
        .collect()
}

/// Expand inputs: files are kept as given, directories contribute their
/// `*.csv` entries in sorted order.
pub fn collect_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(input)
                .map_err(|e| Error::io(input, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "csv"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(input.clone());
        }
    }
    if out.is_empty() {
        return Err(Error::input("no input trial files"));
    }
    Ok(out)
}

fn load_trials(inputs: &[PathBuf]) -> Result<Vec<(PathBuf, Trial)>> {
    collect_inputs(inputs)?
        .into_par_iter()
        .map(|p| ingest_trial(&p).map(|t| (p, t)))
        .collect()
}

/// Ingest trials and extract labelled features (label = material name).
pub fn load_samples(
    inputs: &[PathBuf],
    bands: &BandConfig,
) -> Result<Vec<(PathBuf, String, FeatureVector)>> {
    bands.validate()?;
    load_trials(inputs)?
        .into_par_iter()
        .map(|(p, t)| {
            let fv = extract_features(&t, bands)?;
            Ok((p, t.material.name().to_string(), fv))
        })
        .collect()
}

/// Write per-bin spectra for each trial: raw emitted and received magnitudes
/// plus the smoothed differential, restricted to `[low.lo, high.hi]`.
pub fn cmd_analyze(inputs: &[PathBuf], bands: &BandConfig, out: &Path) -> Result<usize> {
    bands.validate()?;
    let trials = load_trials(inputs)?;
    let blocks: Vec<String> = trials
        .par_iter()
        .map(|(path, t)| {
            let s = trial_spectra(t, bands.filter_width_hz)?;
            let mut block = String::new();
            for (k, ((e, r), d)) in s
                .emitted
                .magnitudes()
                .iter()
                .zip(s.received.magnitudes())
                .zip(s.differential.values())
                .enumerate()
            {
                let f = s.emitted.frequency_of(k);
                if f < bands.low.lo_hz || f > bands.high.hi_hz {
                    continue;
                }
                let _ = writeln!(
                    block,
                    "{},{},{},{},{},{},{}",
                    path.display(),
                    t.material.name(),
                    t.trial_index,
                    fmt_f64(f),
                    fmt_f64(*e),
                    fmt_f64(*r),
                    fmt_f64(*d)
                );
            }
            Ok(block)
        })
        .collect::<Result<_>>()?;
    let mut text =
        String::from("file,material,trial_index,freq_hz,emitted,received,differential\n");
    for b in &blocks {
        text.push_str(b);
    }
    write_atomic(out, text.as_bytes())?;
    Ok(trials.len())
}

/// Extract features, fit a model, and save it.
pub fn cmd_train(
    inputs: &[PathBuf],
    bands: &BandConfig,
    features: [Feature; 2],
    model_out: &Path,
) -> Result<Model> {
    let samples: Vec<(String, FeatureVector)> = load_samples(inputs, bands)?
        .into_iter()
        .map(|(_, label, fv)| (label, fv))
        .collect();
    let model = fit(&samples, features, *bands)?;
    save_model(&model, model_out)?;
    Ok(model)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyRow {
    pub file: PathBuf,
    pub material: String,
    pub predicted: String,
    pub distances: Vec<f64>,
}

/// Classify trials with a saved model. Returns the rows and their CSV rendering.
pub fn cmd_classify(model_path: &Path, inputs: &[PathBuf]) -> Result<(Vec<ClassifyRow>, String)> {
    let model = load_model(model_path)?;
    let rows = load_samples(inputs, &model.band_config)?
        .into_iter()
        .map(|(file, material, fv)| {
            let p = model.predict(&fv)?;
            Ok(ClassifyRow {
                file,
                material,
                predicted: p.label,
                distances: p.distances,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut text = String::from("file,material,predicted");
    for label in model.labels() {
        let _ = write!(text, ",dist_{label}");
    }
    text.push('\n');
    for r in &rows {
        let _ = write!(text, "{},{},{}", r.file.display(), r.material, r.predicted);
        for d in &r.distances {
            let _ = write!(text, ",{}", fmt_f64(*d));
        }
        text.push('\n');
    }
    Ok((rows, text))
}

fn map_paths(out: &Path) -> (PathBuf, PathBuf) {
    if out.extension().is_some_and(|e| e == "svg") {
        (out.with_extension("csv"), out.to_path_buf())
    } else {
        (out.to_path_buf(), out.with_extension("svg"))
    }
}

/// Export the classification map as CSV at `out` plus an SVG alongside it.
pub fn cmd_map(model_path: &Path, inputs: &[PathBuf], out: &Path) -> Result<ClassificationMap> {
    let model = load_model(model_path)?;
    let samples: Vec<(String, FeatureVector)> = load_samples(inputs, &model.band_config)?
        .into_iter()
        .map(|(_, label, fv)| (label, fv))
        .collect();
    let map = export_map(&model, &samples);

    let [fa, fb] = map.features;
    let mut text = format!("kind,label,{fa},{fb},z_{fa},z_{fb}\n");
    for p in &map.points {
        let _ = writeln!(
            text,
            "point,{},{},{},{},{}",
            p.label,
            fmt_f64(p.raw[0]),
            fmt_f64(p.raw[1]),
            fmt_f64(p.normalized[0]),
            fmt_f64(p.normalized[1])
        );
    }
    for c in &map.centroids {
        let raw = [
            model.normalization[0].invert(c.position[0]),
            model.normalization[1].invert(c.position[1]),
        ];
        let _ = writeln!(
            text,
            "centroid,{},{},{},{},{}",
            c.label,
            fmt_f64(raw[0]),
            fmt_f64(raw[1]),
            fmt_f64(c.position[0]),
            fmt_f64(c.position[1])
        );
    }
    let (csv_path, svg_path) = map_paths(out);
    write_atomic(&csv_path, text.as_bytes())?;
    write_atomic(&svg_path, render_svg(&map).as_bytes())?;
    Ok(map)
}
