//! Gallery directories: one binary file per feature plus `manifest.tsv`.
//!
//! Feature files hold a little-endian `u64` length followed by that many
//! little-endian `f64` values. Each manifest line is
//! `label<TAB>file<TAB>corner_size<TAB>length`.

use std::fs;
use std::path::{Path, PathBuf};

use nptmark_core::face::{FaceFeature, Gallery};

use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.tsv";

pub fn encode_feature(feature: &FaceFeature) -> Vec<u8> {
    let values = feature.as_slice();
    let mut out = Vec::with_capacity(8 + 8 * values.len());
    out.extend_from_slice(&(values.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_feature(bytes: &[u8], corner_size: usize) -> Result<FaceFeature> {
    let (len, rest) = bytes
        .split_first_chunk::<8>()
        .ok_or_else(|| Error::format("feature file shorter than its length prefix"))?;
    let len = u64::from_le_bytes(*len) as usize;
    if rest.len() != len.saturating_mul(8) {
        return Err(Error::format(format!(
            "feature file declares {len} values but holds {} bytes",
            rest.len()
        )));
    }
    let values = rest
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok(FaceFeature::from_vec(corner_size, values)?)
}

fn check_label(label: &str) -> Result<()> {
    if label.is_empty() || label.contains(['\t', '\n', '\r']) {
        return Err(Error::Usage(format!("unusable label {label:?}")));
    }
    Ok(())
}

fn write_into(dir: &Path, gallery: &Gallery) -> Result<()> {
    let mut manifest = String::new();
    for (k, (label, feature)) in gallery.entries().iter().enumerate() {
        check_label(label)?;
        let file = format!("feature_{k:05}.f64");
        let path = dir.join(&file);
        fs::write(&path, encode_feature(feature)).map_err(|e| Error::io(&path, e))?;
        manifest.push_str(&format!(
            "{label}\t{file}\t{}\t{}\n",
            feature.corner_size(),
            feature.as_slice().len()
        ));
    }
    let path = dir.join(MANIFEST);
    fs::write(&path, manifest).map_err(|e| Error::io(&path, e))
}

/// Build the gallery in a sibling temporary directory and move it into
/// place. An existing gallery at `dir` is replaced; any other existing
/// directory is refused.
pub fn save_gallery(dir: &Path, gallery: &Gallery) -> Result<()> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    if dir.exists() && !dir.join(MANIFEST).is_file() {
        return Err(Error::Usage(format!(
            "{} exists and is not a gallery",
            dir.display()
        )));
    }
    let staging = tempfile::Builder::new()
        .prefix(".gallery")
        .tempdir_in(&parent)
        .map_err(|e| Error::io(&parent, e))?;
    write_into(staging.path(), gallery)?;
    if dir.exists() {
        fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let staged = staging.keep();
    fs::rename(&staged, dir).map_err(|e| Error::io(dir, e))
}

pub fn load_gallery(dir: &Path) -> Result<Gallery> {
    let path = dir.join(MANIFEST);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut gallery: Option<Gallery> = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let bad = || Error::format(format!("{}:{}: malformed manifest line", path.display(), lineno + 1));
        let fields: Vec<&str> = line.split('\t').collect();
        let [label, file, s, len] = fields[..] else {
            return Err(bad());
        };
        let s: usize = s.parse().map_err(|_| bad())?;
        let len: usize = len.parse().map_err(|_| bad())?;
        if file.contains(['/', '\\']) || file.starts_with('.') {
            return Err(bad());
        }
        let fpath = dir.join(file);
        let bytes = fs::read(&fpath).map_err(|e| Error::io(&fpath, e))?;
        let feature = decode_feature(&bytes, s)?;
        if feature.as_slice().len() != len {
            return Err(bad());
        }
        gallery
            .get_or_insert_with(|| Gallery::new(s))
            .enroll(label, feature)?;
    }
    gallery.ok_or_else(|| nptmark_core::Error::EmptyGallery.into())
}
