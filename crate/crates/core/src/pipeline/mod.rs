//! File formats and command implementations behind the `wavetouch` binary.
//!
//! Every output file is written to a temporary sibling first and renamed into
//! place, so a failed command never leaves a partial file behind.

mod commands;
mod map_plot;
mod model_file;
mod trial_file;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use commands::{
    cmd_analyze, cmd_classify, cmd_map, cmd_synth, cmd_train, collect_inputs, load_samples,
    parse_materials, trial_file_name, ClassifyRow,
};
pub use map_plot::render_svg;
pub use model_file::{load_model, parse_model, render_model, save_model, MODEL_FORMAT_VERSION};
pub use trial_file::{ingest_trial, parse_trial, render_trial, write_trial, TRIAL_FORMAT_VERSION};

use crate::error::{Error, Result};

/// Env var that overrides `--seed`.
pub const SEED_ENV: &str = "WAVETOUCH_SEED";

/// Fixed 17-significant-digit scientific notation; parses back bit-exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write `contents` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| Error::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
